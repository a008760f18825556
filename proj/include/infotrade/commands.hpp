#pragma once

// Subcommands behind the `infotrade` executable. Each returns a process exit
// code: 0 ok, 1 failing compare criteria, 2 config error, 3 model
// precondition, 4 numerical guard.

#include "infotrade/propagate.hpp"
#include "infotrade/scenario.hpp"

#include <exception>
#include <iosfwd>
#include <optional>
#include <string>

namespace infotrade::commands {

enum ExitCode : int { Ok = 0, CriteriaFailed = 1, Config = 2, Precondition = 3, NumericalGuard = 4 };

struct Options {
    std::string config;
    std::string out_dir = ".";
    std::optional<std::string> engines;  // comma list, replaces the config's list
    bool quiet = false;
};

// Maps an in-flight exception to an exit code and writes its message to err.
int report_error(std::exception_ptr e, std::ostream& err);

// Column order t,n1,n2,k1,k2,I1_mean,I2_mean,Pi1,Pi2,M1,M2,leakage; 17
// significant digits; nan where the engine does not produce a column.
std::string run_csv(const propagate::TimeSeries& ts);

// Cartesian product of the scenario's sweep axes (first axis slowest).
// Cells whose decay rate is not positive print nan and "undefined".
std::string asymptote_csv(const Scenario& s);

int cmd_run(const Options& o, std::ostream& out, std::ostream& err);
int cmd_compare(const Options& o, std::ostream& out, std::ostream& err);
int cmd_asymptote(const Options& o, std::ostream& out, std::ostream& err);

}  // namespace infotrade::commands
