#pragma once

#include <stdexcept>
#include <string>

namespace infotrade {

// A model or input precondition was violated (bad cutoffs, zero detuning,
// occupation above cutoff, dimension overflow, ...).
class PreconditionError : public std::invalid_argument {
public:
    explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical guard tripped at run time (truncation leakage, integrator
// step too coarse, norm drift).
class NumericalGuardError : public std::runtime_error {
public:
    explicit NumericalGuardError(const std::string& what) : std::runtime_error(what) {}
};

// A configuration document is malformed or names an unknown field.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace infotrade
