// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run on the desk profile (N = 16, K = 4, 20 seeds). Prints one
// line per criterion and exits non-zero if any fails.

#include <cstdio>

#include "irswpcn/properties.hpp"

int main() {
  using namespace irswpcn;
  PropertySuite suite(desk_profile());
  using Check = CheckResult (PropertySuite::*)();
  const Check checks[] = {&PropertySuite::user_adaptive_dominates_static,    &PropertySuite::ul_adaptive_equals_static,
                          &PropertySuite::general_matches_user_adaptive, &PropertySuite::sufficiency,
                          &PropertySuite::bound_dominance,   &PropertySuite::allocation_oracle,
                          &PropertySuite::surrogate_suite,   &PropertySuite::sca_convergence,
                          &PropertySuite::trends,            &PropertySuite::doubly_near_far,
                          &PropertySuite::product_inequality_fuzz};
  int failed = 0;
  for (Check check : checks) {
    const CheckResult r = (suite.*check)();
    std::printf("criterion %-2s %s  %s: %s\n", r.id.c_str(), r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    std::fflush(stdout);
    failed += r.passed ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(checks)) - failed, std::size(checks));
  return failed == 0 ? 0 : 1;
}
