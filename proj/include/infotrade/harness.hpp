#pragma once

// Cross-engine validation: conservation monitors, engine-vs-engine
// deviations, the coupling-scaling study and the reservoir damping study.

#include "infotrade/propagate.hpp"
#include "infotrade/scenario.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace infotrade::harness {

using propagate::TimeSeries;

enum class Status { Pass, Fail, Inconclusive };

std::string to_string(Status s);

struct CriterionResult {
    std::string id;
    Status status = Status::Fail;
    double value = 0.0;
    std::string threshold;
    std::string detail;
};

struct ComparisonReport {
    std::string scenario;
    nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
    std::vector<CriterionResult> criteria;

    bool passed() const;
    // Appends another report's criteria and metrics under `section`.
    void merge(const std::string& section, const ComparisonReport& other);
};

nlohmann::ordered_json to_json(const ComparisonReport& r);
std::string summary(const ComparisonReport& r);

// Runs fn(0..n-1) on a fixed worker pool. Each index is processed exactly
// once; results written to index-addressed slots are therefore independent
// of scheduling. The exception of the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// One engine on one scenario. The exact engine works on the initial sector.
TimeSeries run_engine(const Scenario& s, Engine engine);

// Max-abs and RMS deviation of n_j, k_j, Pi_j between two series on the same grid.
struct Deviation {
    double max_abs = 0.0;
    double rms = 0.0;
};
Deviation deviation(const TimeSeries& a, const TimeSeries& b);

// Least-squares slope of log(y) against log(x), with RMS residual.
struct LogFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
};
LogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

// <M_j> drift of the full model; <Pi_j> drift with the information terms
// switched off (lambda_inf = gamma = 0), where S_j and K_j must still move;
// the [H, Pi_j] identity on the interior of the initial sector.
ComparisonReport run_conservation_suite(const Scenario& s);

// Pairwise deviations between the scenario's engines.
ComparisonReport run_engine_comparison(const Scenario& s);

// For each epsilon sets lambda = lambda_inf = epsilon and compares the
// closed-form occupations with the Heisenberg ODE on t in [0, min(t_max, 10, 1/epsilon)].
ComparisonReport run_scaling_study(const Scenario& base, const std::vector<double>& epsilons);

// Damping of <I_1> from I_1 = 1 with lambda = lambda_inf = 0 for a ladder
// of reservoir grid sizes; target population rate 2 pi gamma_1^2 / Omega_r_1.
struct DampingRun {
    int nodes = 0;
    Status status = Status::Inconclusive;
    double rate = 0.0;
    double relative_error = 0.0;
    std::size_t fit_points = 0;
};

struct DampingResult {
    double target = 0.0;
    std::vector<DampingRun> runs;
};

DampingResult damping_study(const model::ModelParams& params, const std::vector<int>& grid_sizes,
                            const DampingSpec& spec);
ComparisonReport run_damping_study(const model::ModelParams& params, const std::vector<int>& grid_sizes,
                                   const DampingSpec& spec);

// Decay rate of a population series from a log-linear fit over the first
// passage through [0.2, 0.9]. Sets fit_points to 0 when the window has fewer
// than three samples or the population is not monotone inside it.
DampingRun fit_decay(const std::vector<double>& times, const std::vector<double>& population);

// All suites listed in s.compare.suites.
ComparisonReport run_compare(const Scenario& s);

}  // namespace infotrade::harness
