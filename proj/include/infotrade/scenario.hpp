#pragma once

// Scenario description shared by the CLI and the harness, with a strict JSON
// form: unknown keys are rejected and serialization round-trips exactly.

#include "infotrade/fock.hpp"
#include "infotrade/model.hpp"
#include "infotrade/propagate.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace infotrade {

using propagate::Engine;
using propagate::Occupations;

struct Cutoffs {
    int share = 3;
    int cash = 3;
    int info = 3;
    int reservoir = 1;

    std::array<int, 6> trader() const { return {share, share, cash, cash, info, info}; }
    friend bool operator==(const Cutoffs&, const Cutoffs&) = default;
};

// Midpoint grid of `nodes` points per trader on [-window, window].
struct ReservoirSpec {
    double window = 4.0;
    int nodes = 0;
    friend bool operator==(const ReservoirSpec&, const ReservoirSpec&) = default;
};

struct TimeGrid {
    double t_max = 10.0;
    int samples = 101;
    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

struct Tolerances {
    double propagation = 1e-9;
    double leakage_error = 1e-6;
    double leakage_warning = 1e-9;
    double ode_step = 0.1;
    double ode_tol = 1e-8;
    friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

// Bath used by the damping study: the trader-1 information mode coupled to
// a reservoir of N = grid_sizes[k] midpoint nodes on [-W_N, W_N] with
// W_N = window * sqrt(N / N_min), so refinement both narrows the node spacing
// and widens the band. Couplings come from the trader-1 parameters.
struct DampingSpec {
    double window = 4.0;
    double t_max = 12.0;
    int samples = 601;
    friend bool operator==(const DampingSpec&, const DampingSpec&) = default;
};

struct CompareSpec {
    std::vector<std::string> suites{"conservation", "engines"};
    std::vector<double> epsilons{0.04, 0.02, 0.01};
    std::vector<int> grid_sizes{8, 16, 32};
    DampingSpec damping;
    friend bool operator==(const CompareSpec&, const CompareSpec&) = default;
};

// One sweep axis. Fields: omega_s1, omega_s2, omega_c1, omega_c2, Omega1,
// Omega2, gamma1, gamma2, Omega_r1, Omega_r2, I1, I2, and lambda (which sets
// both lambda and lambda_inf).
struct SweepAxis {
    std::string field;
    std::vector<double> values;
    friend bool operator==(const SweepAxis&, const SweepAxis&) = default;
};

struct Scenario {
    std::string name = "scenario";
    // Reservoir grids are not stored here; see model_params().
    model::ModelParams params;
    Occupations initial{};
    Cutoffs cutoffs;
    ReservoirSpec reservoir;
    TimeGrid time;
    std::vector<Engine> engines{Engine::Exact};
    propagate::HeisenbergForm ode_form = propagate::HeisenbergForm::Reduced;
    Tolerances tolerances;
    std::uint64_t max_dimension = fock::kDefaultMaxDimension;
    CompareSpec compare;
    std::vector<SweepAxis> sweep;

    // Parameters with the midpoint reservoir grid filled in for both traders.
    model::ModelParams model_params() const;
    fock::ModeLayout layout() const;
    std::vector<double> times() const;
    propagate::EvolveOptions evolve_options() const;
    propagate::HeisenbergOptions heisenberg_options() const;

    // Throws ConfigError on values outside the schema's domain and
    // PreconditionError when an initial occupation exceeds its cutoff.
    void validate() const;

    friend bool operator==(const Scenario&, const Scenario&);
};

Engine parse_engine(const std::string& name);
std::vector<Engine> parse_engine_list(const std::string& comma_separated);

nlohmann::ordered_json to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::ordered_json& doc);

// Text form. Parse errors carry line/column or the offending field path.
std::string serialize(const Scenario& s);
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

// Sets a sweep field on a copy of the scenario.
Scenario with_field(const Scenario& s, const std::string& field, double value);

}  // namespace infotrade
