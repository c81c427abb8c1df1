// Runs every acceptance criterion and prints one line each.

#include <cstdio>

#include "ovc/acceptance.hpp"

int main() {
  int failed = 0;
  for (int id = 1; id <= ovc::acceptance::kCriteria; ++id) {
    auto c = ovc::acceptance::run_criterion(id);
    std::printf("criterion %2d %s  %s  (%s) [%.2fs]\n", c.id, c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str(),
                c.seconds);
    std::fflush(stdout);
    if (!c.pass) ++failed;
  }
  std::printf("%d/%d criteria passed\n", ovc::acceptance::kCriteria - failed, ovc::acceptance::kCriteria);
  return failed ? 1 : 0;
}
