#include "rubberroll/serialize.hpp"

#include <charconv>
#include <cmath>
#include <json.hpp>
#include <ostream>

namespace rubberroll {

namespace {

using nlohmann::json;

json params_json(const Params& p) {
  return {{"alpha", p.alpha}, {"beta", p.beta}, {"nu", p.nu}, {"eta", p.eta}, {"b_sign", to_string(p.b_sign)}};
}

// NaN and infinities become null, which nlohmann does on its own; kept
// explicit so optional values read the same way.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& os, const AbsoluteTrajectory& tr) {
  os << kTrajectoryHeader << '\n';
  for (const auto& s : tr.samples) {
    const double row[] = {s.t, s.theta, s.p_theta, s.psi, s.phi, s.x_c, s.y_c, s.z_c, s.x_p, s.y_p, s.eps_drift,
                          s.f1_drift};
    for (std::size_t i = 0; i < std::size(row); ++i) os << (i ? "," : "") << format_number(row[i]);
    os << '\n';
  }
}

void write_rotation_csv(std::ostream& os, const std::vector<RotationRow>& rows) {
  os << "kappa,eps,N,N_err\n";
  for (const auto& r : rows)
    os << format_number(r.kappa) << ',' << format_number(r.eps) << ',' << format_number(r.N) << ','
       << format_number(r.N_err) << '\n';
}

void write_resonance_csv(std::ostream& os, int n, const std::vector<ResonancePoint>& pts, bool header) {
  if (header) os << "n,kappa,eps,N\n";
  for (const auto& r : pts)
    os << n << ',' << format_number(r.kappa) << ',' << format_number(r.eps) << ',' << format_number(r.N) << '\n';
}

std::string diagram_json(const BifurcationDiagram& d) {
  json curves = json::array();
  for (const auto& c : d.curves) {
    json samples = json::array();
    for (const auto& s : c.samples)
      samples.push_back({{"theta0", s.theta0}, {"kappa", s.kappa}, {"eps", s.eps}, {"stability", to_string(s.stability)}});
    curves.push_back({{"label", c.label}, {"kappa_sign", c.kappa_sign}, {"samples", std::move(samples)}});
  }
  json points = json::array();
  for (const auto& pt : d.points)
    points.push_back({{"label", pt.label},
                      {"theta", pt.theta},
                      {"kappa", pt.kappa},
                      {"eps", pt.eps},
                      {"isolated", pt.isolated},
                      {"stable", pt.stable}});
  json doc = {{"params", params_json(d.params)},
              {"diagram_type", to_string(d.type)},
              {"boundary", d.boundary},
              {"curves", std::move(curves)},
              {"points", std::move(points)},
              {"cusp", nullptr},
              {"theta_star", d.theta_star ? json(*d.theta_star) : json(nullptr)},
              {"eps_min", d.eps_min},
              {"rpm_boundary", d.rpm_boundary}};
  if (d.cusp) doc["cusp"] = {{"theta", d.cusp->theta}, {"kappa", d.cusp->kappa}, {"eps", d.cusp->eps}};
  return doc.dump(1) + "\n";
}

std::vector<std::string> check_diagram_json(const std::string& text) {
  std::vector<std::string> bad;
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) return {"not valid JSON"};
  if (!doc.is_object()) return {"top level is not an object"};
  auto need = [&](const json& obj, const char* key, auto pred, const std::string& where) {
    if (!obj.contains(key) || !pred(obj[key])) bad.push_back(where + "." + key + " missing or mistyped");
  };
  auto is_num = [](const json& j) { return j.is_number(); };
  auto is_str = [](const json& j) { return j.is_string(); };
  auto is_bool = [](const json& j) { return j.is_boolean(); };
  auto is_arr = [](const json& j) { return j.is_array(); };
  auto is_obj = [](const json& j) { return j.is_object(); };
  need(doc, "params", is_obj, "$");
  need(doc, "diagram_type", is_str, "$");
  need(doc, "curves", is_arr, "$");
  need(doc, "points", is_arr, "$");
  if (!doc.contains("cusp") || !(doc["cusp"].is_null() || doc["cusp"].is_object())) bad.push_back("$.cusp missing");
  if (!bad.empty()) return bad;
  for (const char* k : {"alpha", "beta", "nu", "eta"}) need(doc["params"], k, is_num, "$.params");
  const std::string type = doc["diagram_type"];
  if (type.size() != 1 || type[0] < 'a' || type[0] > 'e') bad.push_back("$.diagram_type not one of a..e");
  for (std::size_t i = 0; i < doc["curves"].size(); ++i) {
    const json& c = doc["curves"][i];
    const std::string where = "$.curves[" + std::to_string(i) + "]";
    need(c, "label", is_str, where);
    need(c, "samples", is_arr, where);
    if (!c.contains("samples") || !c["samples"].is_array()) continue;
    for (const json& s : c["samples"]) {
      for (const char* k : {"theta0", "kappa", "eps"}) need(s, k, is_num, where + ".samples[]");
      if (!s.contains("stability") || (s["stability"] != "center" && s["stability"] != "saddle"))
        bad.push_back(where + ".samples[].stability invalid");
      if (bad.size() > 20) return bad;
    }
  }
  for (std::size_t i = 0; i < doc["points"].size(); ++i) {
    const json& pt = doc["points"][i];
    const std::string where = "$.points[" + std::to_string(i) + "]";
    need(pt, "label", is_str, where);
    need(pt, "kappa", is_num, where);
    need(pt, "eps", is_num, where);
    need(pt, "isolated", is_bool, where);
    need(pt, "stable", is_bool, where);
  }
  if (doc["cusp"].is_object())
    for (const char* k : {"theta", "kappa", "eps"}) need(doc["cusp"], k, is_num, "$.cusp");
  return bad;
}

std::string classification_json(double kappa, double eps, int branch, const Params& p, const Classification& c) {
  json doc = {{"params", params_json(p)},
              {"kappa", kappa},
              {"eps", eps},
              {"branch", branch},
              {"class", to_string(c.cls)},
              {"components", c.components},
              {"theta_min", c.theta_min},
              {"theta_max", c.theta_max},
              {"asymptotic", c.asymptotic},
              {"near_separatrix", c.near_separatrix},
              {"target", c.target},
              {"N", nullptr},
              {"N_err", nullptr},
              {"tolerance", nullptr},
              {"resonance", nullptr}};
  if (c.has_N) {
    doc["N"] = num(c.N);
    doc["N_err"] = num(c.N_err);
    doc["tolerance"] = num(c.tolerance);
  }
  if (c.denominator > 0) doc["resonance"] = {{"numerator", c.numerator}, {"denominator", c.denominator}};
  return doc.dump(1) + "\n";
}

std::string kappa_max_json(const Params& p, const std::optional<KappaMax>& k) {
  json doc = {{"params", params_json(p)}, {"kappa_max", nullptr}};
  if (k)
    doc["kappa_max"] = {{"kappa", k->kappa}, {"eps", k->eps}, {"N", k->N}, {"dN_deps", k->dN_deps}};
  return doc.dump(1) + "\n";
}

}  // namespace rubberroll
