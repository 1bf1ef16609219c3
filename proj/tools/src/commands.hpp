#pragma once

#include <functional>
#include <iosfwd>

#include "config.hpp"

namespace bbo::cli {

enum ExitCode : int {
    kExitOk = 0,
    /// nflt-verify found a counterexample.
    kExitNotEqual = 1,
    kExitConfig = 2,
    kExitEvaluator = 3,
    kExitInternal = 4,
};

/// Each command writes its files into common.out plus the effective config as
/// config.json, prints a short report to `log`, and returns the exit code.
/// ConfigError and bbo::Error escape; exit_code_for maps them.
int cmd_nflt_verify(const NfltConfig& config, std::ostream& log);
int cmd_optimize(const OptimizeConfig& config, std::ostream& log);
int cmd_bench(const BenchConfig& config, std::ostream& log);
int cmd_gp_plotdata(const GpPlotConfig& config, std::ostream& log);

/// Runs `body`, printing any error to `err` and mapping it to an exit code:
/// configuration problems (including ClassTooLarge) give 2, evaluator
/// failures 3, anything else 4.
int run_guarded(const std::function<int()>& body, std::ostream& err);

} // namespace bbo::cli
