#include "infotrade/harness.hpp"

#include "infotrade/errors.hpp"
#include "infotrade/perturb.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

namespace infotrade::harness {

using json = nlohmann::ordered_json;

std::string to_string(Status s) {
    switch (s) {
        case Status::Pass: return "pass";
        case Status::Fail: return "fail";
        case Status::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

bool ComparisonReport::passed() const {
    return std::all_of(criteria.begin(), criteria.end(),
                       [](const CriterionResult& c) { return c.status == Status::Pass; });
}

void ComparisonReport::merge(const std::string& section, const ComparisonReport& other) {
    metrics[section] = other.metrics;
    criteria.insert(criteria.end(), other.criteria.begin(), other.criteria.end());
}

json to_json(const ComparisonReport& r) {
    json doc;
    doc["scenario"] = r.scenario;
    doc["passed"] = r.passed();
    json crit = json::array();
    for (const auto& c : r.criteria) {
        crit.push_back({{"id", c.id},
                        {"status", to_string(c.status)},
                        {"value", c.value},
                        {"threshold", c.threshold},
                        {"detail", c.detail}});
    }
    doc["criteria"] = crit;
    doc["metrics"] = r.metrics;
    return doc;
}

std::string summary(const ComparisonReport& r) {
    std::ostringstream out;
    out << "scenario " << r.scenario << ": " << (r.passed() ? "PASS" : "FAIL") << "\n";
    for (const auto& c : r.criteria) {
        out << "  [" << to_string(c.status) << "] " << c.id << " = " << c.value << " (" << c.threshold << ")";
        if (!c.detail.empty()) out << " " << c.detail;
        out << "\n";
    }
    return out.str();
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

namespace {

struct SectorModel {
    std::shared_ptr<const fock::ModeLayout> layout;
    propagate::Sector sector;
    model::ModelOperators ops;
    fock::StateVector psi0;
};

SectorModel build_sector_model(const Scenario& s, const model::ModelParams& p) {
    SectorModel m;
    m.layout = std::make_shared<const fock::ModeLayout>(s.layout());
    m.sector = propagate::sector_of(m.layout, s.initial);
    m.ops = propagate::build_sector_operators(m.sector, p);
    m.psi0 = fock::number_state(m.sector.basis, s.initial);
    return m;
}

CriterionResult at_most(std::string id, double value, double limit, std::string detail = {}) {
    std::ostringstream th;
    th << "<= " << limit;
    return {std::move(id), value <= limit ? Status::Pass : Status::Fail, value, th.str(), std::move(detail)};
}

double max_drift(const TimeSeries& ts, const std::function<double(const propagate::Observables&)>& f) {
    double d = 0.0;
    const double v0 = f(ts.values.front());
    for (const auto& o : ts.values) d = std::max(d, std::abs(f(o) - v0));
    return d;
}

}  // namespace

TimeSeries run_engine(const Scenario& s, Engine engine) {
    const auto p = s.model_params();
    switch (engine) {
        case Engine::Exact: {
            const auto m = build_sector_model(s, p);
            return propagate::evolve_exact(m.ops, m.psi0, s.times(), s.evolve_options());
        }
        case Engine::HeisenbergODE: {
            const propagate::HeisenbergSystem sys(s.cutoffs.trader());
            return propagate::integrate_heisenberg(sys, p, s.initial, s.times(), s.heisenberg_options());
        }
        case Engine::Perturbative:
            return perturb::perturbative_series({p, s.initial}, s.times());
    }
    throw PreconditionError("unknown engine");
}

Deviation deviation(const TimeSeries& a, const TimeSeries& b) {
    if (a.times != b.times) throw PreconditionError("deviation: series are on different time grids");
    Deviation d;
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < a.times.size(); ++k) {
        const auto& x = a.values[k];
        const auto& y = b.values[k];
        for (int j = 0; j < 2; ++j) {
            for (double e : {x.S[j] - y.S[j], x.K[j] - y.K[j], x.Pi[j] - y.Pi[j]}) {
                d.max_abs = std::max(d.max_abs, std::abs(e));
                sum += e * e;
                ++count;
            }
        }
    }
    d.rms = count ? std::sqrt(sum / static_cast<double>(count)) : 0.0;
    return d;
}

LogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw PreconditionError("fit_loglog: need >= 2 matched points");
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double lx = std::log(x[k]);
        const double ly = std::log(y[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    LogFit f;
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / n;
    double res = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double r = std::log(y[k]) - (f.intercept + f.slope * std::log(x[k]));
        res += r * r;
    }
    f.residual = std::sqrt(res / n);
    return f;
}

ComparisonReport run_conservation_suite(const Scenario& s) {
    ComparisonReport r;
    r.scenario = s.name;
    const auto p = s.model_params();
    const auto times = s.times();

    const auto full = build_sector_model(s, p);
    const auto ts = propagate::evolve_exact(full.ops, full.psi0, times, s.evolve_options());
    double m_drift = 0.0;
    double leak = 0.0;
    for (int j = 0; j < 2; ++j) m_drift = std::max(m_drift, max_drift(ts, [j](const auto& o) { return o.M[j]; }));
    for (const auto& o : ts.values) leak = std::max(leak, o.leakage);
    r.metrics["sector"] = {{"m1", full.sector.m1}, {"m2", full.sector.m2}, {"dimension", full.sector.basis.size()}};
    r.metrics["M_drift"] = m_drift;
    r.metrics["leakage_max"] = leak;
    r.metrics["warnings"] = ts.warnings;
    r.criteria.push_back(at_most("M_drift", m_drift, 1e-8));
    r.criteria.push_back(at_most("leakage", leak, s.tolerances.leakage_error));

    auto quiet = p;
    quiet.lambda_inf = 0.0;
    quiet.gamma = {0.0, 0.0};
    const auto no_info = build_sector_model(s, quiet);
    const auto ts0 = propagate::evolve_exact(no_info.ops, no_info.psi0, times, s.evolve_options());
    double pi_drift = 0.0;
    double sk_variation = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 2; ++j) {
        pi_drift = std::max(pi_drift, max_drift(ts0, [j](const auto& o) { return o.Pi[j]; }));
        sk_variation = std::min({sk_variation, max_drift(ts0, [j](const auto& o) { return o.S[j]; }),
                                 max_drift(ts0, [j](const auto& o) { return o.K[j]; })});
    }
    r.metrics["no_information"] = {{"Pi_drift", pi_drift}, {"min_S_K_variation", sk_variation}};
    r.criteria.push_back(at_most("no_information_Pi_drift", pi_drift, 1e-10));
    r.criteria.push_back({"no_information_S_K_variation", sk_variation > 1e-3 ? Status::Pass : Status::Fail,
                          sk_variation, "> 0.001", "smallest max |x(t) - x(0)| over S_j, K_j"});

    const auto keep = fock::interior_mask(full.sector.basis);
    double pi_residual = 0.0;
    double m_residual = 0.0;
    for (int j = 0; j < 2; ++j) {
        const auto lhs = fock::project(fock::commutator(full.ops.H, full.ops.Pi[j]), keep);
        const auto rhs = fock::project(model::portfolio_commutator_formula(full.sector.basis, p, j + 1), keep);
        pi_residual = std::max(pi_residual, fock::max_abs_difference(lhs, rhs));
        m_residual = std::max(m_residual, fock::project(fock::commutator(full.ops.H, full.ops.M[j]), keep).max_abs());
    }
    r.metrics["commutator_Pi_residual"] = pi_residual;
    r.metrics["commutator_M_residual"] = m_residual;
    r.criteria.push_back(at_most("commutator_Pi", pi_residual, 1e-12));
    r.criteria.push_back(at_most("commutator_M", m_residual, 1e-12));
    return r;
}

ComparisonReport run_engine_comparison(const Scenario& s) {
    ComparisonReport r;
    r.scenario = s.name;
    std::vector<TimeSeries> series(s.engines.size());
    parallel_for(series.size(), [&](std::size_t k) { series[k] = run_engine(s, s.engines[k]); });
    json pairs = json::array();
    for (std::size_t a = 0; a < series.size(); ++a) {
        for (std::size_t b = a + 1; b < series.size(); ++b) {
            const auto d = deviation(series[a], series[b]);
            pairs.push_back({{"engines", {propagate::to_string(s.engines[a]), propagate::to_string(s.engines[b])}},
                             {"max_abs", d.max_abs},
                             {"rms", d.rms}});
        }
    }
    r.metrics["pairs"] = pairs;
    return r;
}

ComparisonReport run_scaling_study(const Scenario& base, const std::vector<double>& epsilons) {
    if (epsilons.size() < 3) throw PreconditionError("scaling study needs at least 3 epsilon values");
    const double ratio = epsilons[1] / epsilons[0];
    for (std::size_t k = 0; k < epsilons.size(); ++k) {
        if (!(epsilons[k] > 0.0)) throw PreconditionError("scaling study: epsilons must be > 0");
        if (k > 0 && std::abs(epsilons[k] / epsilons[k - 1] - ratio) > 1e-9 * ratio) {
            throw PreconditionError("scaling study: epsilons must form a geometric ladder");
        }
    }
    if (ratio == 1.0) throw PreconditionError("scaling study: epsilons must be distinct");

    const propagate::HeisenbergSystem sys(base.cutoffs.trader());
    const std::size_t n = epsilons.size();
    std::vector<double> error(n), dpi(n), t_end(n);
    parallel_for(n, [&](std::size_t k) {
        const double eps = epsilons[k];
        auto p = base.model_params();
        p.lambda = p.lambda_inf = eps;
        t_end[k] = std::min({base.time.t_max, 10.0, 1.0 / eps});
        const auto times = propagate::uniform_times(t_end[k], base.time.samples);
        const auto ode = propagate::integrate_heisenberg(sys, p, base.initial, times, base.heisenberg_options());
        const auto pert = perturb::perturbative_series({p, base.initial}, times);
        double e = 0.0;
        double d = 0.0;
        for (std::size_t i = 0; i < times.size(); ++i) {
            for (int j = 0; j < 2; ++j) {
                e = std::max({e, std::abs(ode.values[i].S[j] - pert.values[i].S[j]),
                              std::abs(ode.values[i].K[j] - pert.values[i].K[j])});
                d = std::max(d, std::abs(ode.values[i].Pi[j] - ode.values[0].Pi[j]));
            }
        }
        error[k] = e;
        dpi[k] = d;
    });

    // Errors must shrink along the ladder as epsilon decreases.
    std::vector<std::size_t> order(n);
    for (std::size_t k = 0; k < n; ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return epsilons[a] > epsilons[b]; });
    bool monotone_error = true;
    bool monotone_dpi = true;
    for (std::size_t k = 1; k < n; ++k) {
        monotone_error = monotone_error && error[order[k]] < error[order[k - 1]] && error[order[k]] > 0.0;
        monotone_dpi = monotone_dpi && dpi[order[k]] < dpi[order[k - 1]] && dpi[order[k]] > 0.0;
    }

    ComparisonReport r;
    r.scenario = base.name;
    json ladder = json::array();
    for (std::size_t k = 0; k < n; ++k) {
        ladder.push_back({{"epsilon", epsilons[k]}, {"t_end", t_end[k]}, {"max_error", error[k]}, {"delta_pi", dpi[k]}});
    }
    r.metrics["ladder"] = ladder;

    CriterionResult slope{"scaling_slope", Status::Inconclusive, std::numeric_limits<double>::quiet_NaN(),
                          "in [2.5, 3.5]", ""};
    if (monotone_error) {
        const auto fit = fit_loglog(epsilons, error);
        r.metrics["error_fit"] = {{"slope", fit.slope}, {"residual", fit.residual}};
        slope.value = fit.slope;
        slope.status = fit.slope >= 2.5 && fit.slope <= 3.5 ? Status::Pass : Status::Fail;
        std::ostringstream detail;
        detail << "fit residual " << fit.residual;
        slope.detail = detail.str();
    } else {
        slope.detail = "error ladder is not monotone";
    }
    r.criteria.push_back(slope);

    CriterionResult pi_slope{"delta_pi_slope", Status::Inconclusive, std::numeric_limits<double>::quiet_NaN(),
                             "2.0 +- 0.2", ""};
    if (monotone_dpi) {
        const auto fit = fit_loglog(epsilons, dpi);
        r.metrics["delta_pi_fit"] = {{"slope", fit.slope}, {"residual", fit.residual}};
        pi_slope.value = fit.slope;
        pi_slope.status = std::abs(fit.slope - 2.0) <= 0.2 ? Status::Pass : Status::Fail;
        std::ostringstream detail;
        detail << "fit residual " << fit.residual;
        pi_slope.detail = detail.str();
    } else {
        pi_slope.detail = "portfolio variation ladder is not monotone";
    }
    r.criteria.push_back(pi_slope);
    return r;
}

DampingRun fit_decay(const std::vector<double>& times, const std::vector<double>& population) {
    DampingRun run;
    if (times.size() != population.size() || times.empty()) throw PreconditionError("fit_decay: size mismatch");
    double spread = 0.0;
    for (double v : population) spread = std::max(spread, std::abs(v - population.front()));
    if (spread <= 1e-12) {
        run.status = Status::Pass;
        return run;
    }
    std::size_t a = 0;
    while (a < population.size() && population[a] > 0.9) ++a;
    std::size_t b = a;
    while (b < population.size() && population[b] >= 0.2) ++b;
    if (b - a < 3) return run;
    for (std::size_t k = a + 1; k < b; ++k) {
        if (population[k] > population[k - 1]) return run;
    }
    double st = 0, sl = 0, stt = 0, stl = 0;
    const auto n = static_cast<double>(b - a);
    for (std::size_t k = a; k < b; ++k) {
        const double l = std::log(population[k]);
        st += times[k];
        sl += l;
        stt += times[k] * times[k];
        stl += times[k] * l;
    }
    run.rate = -(n * stl - st * sl) / (n * stt - st * st);
    run.fit_points = b - a;
    run.status = Status::Pass;
    return run;
}

DampingResult damping_study(const model::ModelParams& params, const std::vector<int>& grid_sizes,
                            const DampingSpec& spec) {
    if (grid_sizes.empty()) throw PreconditionError("damping study needs at least one grid size");
    DampingResult result;
    result.target = 2.0 * model::damping_rate(params, 1);
    const auto times = propagate::uniform_times(spec.t_max, spec.samples);
    result.runs.resize(grid_sizes.size());
    const int smallest = *std::min_element(grid_sizes.begin(), grid_sizes.end());
    if (smallest < 1) throw PreconditionError("damping study: grid sizes must be >= 1");
    parallel_for(grid_sizes.size(), [&](std::size_t k) {
        const int nodes = grid_sizes[k];
        // Window grows as sqrt(nodes) so both the band half-width and the
        // node density increase along the ladder.
        const double window = spec.window * std::sqrt(static_cast<double>(nodes) / smallest);
        model::ModelParams p;
        p.omega_s = {params.omega_s[0], 0.0};
        p.omega_c = {params.omega_c[0], 0.0};
        p.Omega = {params.Omega[0], 0.0};
        p.gamma = {params.gamma[0], 0.0};
        p.Omega_r = {params.Omega_r[0], 1.0};
        p.reservoir_grid[0] = model::midpoint_grid(window, nodes);
        if (!model::grid_covers_resonance(p, 1)) {
            throw PreconditionError("damping study: the reservoir window does not cover Omega_1 / Omega_r_1");
        }
        // Only the single-excitation sector is materialized, so the full
        // layout dimension may far exceed what could be stored.
        const auto layout = std::make_shared<const fock::ModeLayout>(
            fock::build_layout({1, 1, 1, 1, 1, 1}, {nodes, 0}, 1, std::uint64_t{1} << 62));
        const Occupations occ{0, 0, 0, 0, 1, 0};
        const auto sector = propagate::sector_of(layout, occ);
        const auto ops = propagate::build_sector_operators(sector, p);
        const auto ts = propagate::evolve_exact(ops, fock::number_state(sector.basis, occ), times);
        std::vector<double> pop;
        for (const auto& o : ts.values) pop.push_back(o.I[0]);
        auto run = fit_decay(times, pop);
        run.nodes = nodes;
        run.relative_error = result.target != 0.0 ? std::abs(run.rate - result.target) / result.target
                                                  : std::abs(run.rate);
        result.runs[k] = run;
    });
    return result;
}

ComparisonReport run_damping_study(const model::ModelParams& params, const std::vector<int>& grid_sizes,
                                   const DampingSpec& spec) {
    const auto res = damping_study(params, grid_sizes, spec);
    ComparisonReport r;
    r.metrics["target_rate"] = res.target;
    json runs = json::array();
    for (const auto& run : res.runs) {
        runs.push_back({{"nodes", run.nodes},
                        {"status", to_string(run.status)},
                        {"rate", run.rate},
                        {"relative_error", run.relative_error},
                        {"fit_points", run.fit_points}});
    }
    r.metrics["runs"] = runs;

    std::vector<std::size_t> order(res.runs.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return res.runs[a].nodes < res.runs[b].nodes; });
    const auto& finest = res.runs[order.back()];

    CriterionResult fin{"damping_finest_grid", Status::Inconclusive, finest.relative_error, "<= 0.2", ""};
    if (finest.status == Status::Pass) fin.status = finest.relative_error <= 0.2 ? Status::Pass : Status::Fail;
    fin.detail = "nodes " + std::to_string(finest.nodes);
    r.criteria.push_back(fin);

    CriterionResult mono{"damping_monotone", Status::Pass, 0.0, "strictly decreasing error", ""};
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& run = res.runs[order[k]];
        if (run.status != Status::Pass) {
            mono.status = Status::Inconclusive;
            mono.detail = "fit failed at " + std::to_string(run.nodes) + " nodes";
            break;
        }
        if (k > 0 && !(run.relative_error < res.runs[order[k - 1]].relative_error)) {
            mono.status = Status::Fail;
            mono.detail = "error grows from " + std::to_string(res.runs[order[k - 1]].nodes) + " to " +
                          std::to_string(run.nodes) + " nodes";
        }
    }
    mono.value = static_cast<double>(order.size());
    r.criteria.push_back(mono);
    return r;
}

ComparisonReport run_compare(const Scenario& s) {
    ComparisonReport r;
    r.scenario = s.name;
    for (const auto& suite : s.compare.suites) {
        if (suite == "conservation") r.merge(suite, run_conservation_suite(s));
        else if (suite == "engines") r.merge(suite, run_engine_comparison(s));
        else if (suite == "scaling") r.merge(suite, run_scaling_study(s, s.compare.epsilons));
        else if (suite == "damping") r.merge(suite, run_damping_study(s.params, s.compare.grid_sizes, s.compare.damping));
        else throw ConfigError("compare.suites: unknown suite '" + suite + "'");
    }
    return r;
}

}  // namespace infotrade::harness
