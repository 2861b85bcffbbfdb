// Acceptance bank runner: one pass/fail line per criterion, asserted.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>

#include "drmat/suite.hpp"

TEST_CASE("acceptance criteria") {
    auto results = drmat::run_acceptance_suite(2024);
    for (const auto& r : results) {
        std::printf("C%02d %-28s %-4s residual=%.3e %s %.0e  (%.2fs)%s%s\n", r.id,
                    r.name.c_str(), r.pass ? "PASS" : "FAIL", r.max_residual,
                    r.invert ? ">" : "<", r.tolerance, r.seconds,
                    r.detail.empty() ? "" : "  -- ", r.detail.c_str());
        std::fflush(stdout);
    }
    for (const auto& r : results) {
        INFO("criterion " << r.id << " (" << r.name << "): residual " << r.max_residual
                          << (r.invert ? " must exceed " : " must stay below ")
                          << r.tolerance << " " << r.detail);
        CHECK(r.pass);
    }
}
