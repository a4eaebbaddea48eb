// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. The checks live in pmelab/verification.hpp and are shared with
// the `pme verify` command.

#include <cstdio>

#include "pmelab/verification.hpp"

int main() {
    const pmelab::AcceptanceReport report = pmelab::run_acceptance();
    for (const auto& c : report.checks) {
        std::printf("%s  criterion %2d %-28s measured=%-12.6g tolerance=%-12.6g (%.2fs)\n",
                    c.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), c.measured,
                    c.tolerance, c.seconds);
        if (!c.detail.empty()) std::printf("      %s\n", c.detail.c_str());
    }
    std::printf("%zu/%zu criteria passed\n",
                static_cast<std::size_t>(
                    std::count_if(report.checks.begin(), report.checks.end(),
                                  [](const auto& c) { return c.pass; })),
                report.checks.size());
    return report.all_pass() ? 0 : 1;
}
