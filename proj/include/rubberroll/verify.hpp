#pragma once

// Self-check suite behind the `verify` command: conservation, reduced versus
// full dynamics, the invariant measure, curve identities and the checks that
// arbitrate between competing closed forms.

#include <cstdint>
#include <string>
#include <vector>

#include "rubberroll/model.hpp"

namespace rubberroll {

struct VerifyItem {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyItem> items;
  bool all_passed() const;
};

/// quick restricts the run to the sub-second subset. Random states come from
/// a generator seeded with `seed`, so reports are reproducible.
VerifyReport run_verification(const Params& p, bool quick, std::uint64_t seed);

/// One line per item: "PASS name: detail" or "FAIL name: detail".
std::string format_report(const VerifyReport& r);

}  // namespace rubberroll
