#pragma once

// The fockqkd command-line front end, callable in-process for tests.

#include <iosfwd>
#include <string>
#include <vector>

namespace fockqkd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

inline constexpr const char* kThresholdHeader =
    "source,amplitude,order,eta_alice,eta_bob,p1,p_multi_cond,conclusive_rate,t_star,"
    "fatal_loss_percent,fatal_loss_db";

// args excludes the program name. Normal output goes to `out` (or the
// --out file), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fockqkd::cli
