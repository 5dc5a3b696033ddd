#include "rubberroll/model.hpp"

#include <cmath>
#include <sstream>

#include "rubberroll/error.hpp"

namespace rubberroll {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::ostringstream out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out << "; ";
    out << items[i];
  }
  return out.str();
}

}  // namespace

std::vector<std::string> validate(const Params& p) {
  std::vector<std::string> issues;
  // Written as negated inclusions so NaN fails every check.
  if (!(p.alpha >= 0.0 && p.alpha <= 1.0)) issues.emplace_back("α out of [0,1]");
  if (!(p.beta > 0.0 && std::isfinite(p.beta))) issues.emplace_back("β out of (0,∞)");
  if (!(p.nu > 0.0 && p.nu <= 2.0)) issues.emplace_back("ν out of (0,2]");
  if (!(p.eta > 0.0 && std::isfinite(p.eta))) issues.emplace_back("η out of (0,∞)");
  return issues;
}

std::vector<std::string> validate(const DimensionalBody& body) {
  std::vector<std::string> issues;
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0 && std::isfinite(v))) issues.emplace_back(std::string(name) + " must be positive");
  };
  positive(body.m, "m");
  positive(body.g, "g");
  positive(body.b1, "b1");
  positive(body.b3, "b3");
  positive(body.i1, "i1");
  positive(body.i3, "i3");
  if (!(body.a >= 0.0 && std::isfinite(body.a))) issues.emplace_back("a must be non-negative");
  return issues;
}

void require_valid(const Params& p) {
  const auto issues = validate(p);
  if (!issues.empty()) throw Error(ErrorCode::kInvalidArgument, "invalid parameters: " + join(issues));
}

Nondimensionalized nondimensionalize(const DimensionalBody& body) {
  if (const auto issues = validate(body); !issues.empty())
    throw Error(ErrorCode::kInvalidArgument, "invalid body: " + join(issues));

  Nondimensionalized out;
  out.params.alpha = body.a / body.b3;
  out.params.beta = body.b1 / body.b3;
  out.params.nu = body.i3 / body.i1;
  out.params.eta = body.m * body.b3 * body.b3 / body.i1;
  out.scales = {body.b3, body.m, std::sqrt(body.b3 / body.g)};
  require_valid(out.params);
  return out;
}

const char* to_string(BSign sign) { return sign == BSign::kPaper ? "paper" : "derived"; }

BSign parse_b_sign(const std::string& text) {
  if (text == "derived") return BSign::kDerived;
  if (text == "paper") return BSign::kPaper;
  throw Error(ErrorCode::kInvalidArgument, "b-sign must be 'derived' or 'paper', got '" + text + "'");
}

}  // namespace rubberroll
