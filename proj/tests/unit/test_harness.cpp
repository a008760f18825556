#include "infotrade/errors.hpp"
#include "infotrade/harness.hpp"

#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <numbers>

using namespace infotrade;
using namespace infotrade::harness;

namespace {

Scenario small_scenario() {
    Scenario s;
    s.name = "small";
    s.params = support::generic_params(0.2);
    s.initial = {1, 0, 1, 1, 1, 1};
    s.cutoffs = {3, 3, 3, 3};
    s.reservoir = {4.0, 1};
    s.time = {5.0, 26};
    return s;
}

}  // namespace

TEST_CASE("log-log fit recovers a power law", "[harness]") {
    const std::vector<double> x{0.04, 0.02, 0.01};
    std::vector<double> y;
    for (double v : x) y.push_back(7.0 * std::pow(v, 3.0));
    const auto f = fit_loglog(x, y);
    REQUIRE(f.slope == Catch::Approx(3.0).epsilon(1e-12));
    REQUIRE(f.residual < 1e-12);
    REQUIRE_THROWS_AS(fit_loglog({1.0}, {1.0}), PreconditionError);
}

TEST_CASE("decay fit", "[harness][damping]") {
    std::vector<double> t, pop;
    for (int k = 0; k <= 400; ++k) {
        t.push_back(0.01 * k);
        pop.push_back(std::exp(-0.8 * t.back()));
    }
    const auto run = fit_decay(t, pop);
    REQUIRE(run.status == Status::Pass);
    REQUIRE(run.rate == Catch::Approx(0.8).epsilon(1e-10));
    REQUIRE(run.fit_points > 100);

    const auto flat = fit_decay(t, std::vector<double>(t.size(), 1.0));
    REQUIRE(flat.status == Status::Pass);
    REQUIRE(flat.rate == 0.0);

    // revival inside the fit window
    auto bumpy = pop;
    bumpy[100] = bumpy[90];
    REQUIRE(fit_decay(t, bumpy).status == Status::Inconclusive);
}

TEST_CASE("parallel_for visits each index once and rethrows the lowest failure", "[harness]") {
    std::vector<std::atomic<int>> hits(257);
    parallel_for(hits.size(), [&](std::size_t k) { hits[k]++; });
    for (auto& h : hits) REQUIRE(h.load() == 1);
    try {
        parallel_for(64, [](std::size_t k) {
            if (k == 5 || k == 40) throw std::runtime_error("fail " + std::to_string(k));
        });
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        REQUIRE(std::string(e.what()) == "fail 5");
    }
}

TEST_CASE("deviation metrics", "[harness]") {
    propagate::TimeSeries a, b;
    a.times = b.times = {0.0, 1.0};
    a.values.resize(2);
    b.values.resize(2);
    b.values[1].S[0] = 0.3;
    b.values[1].Pi[1] = -0.4;
    const auto d = deviation(a, b);
    REQUIRE(d.max_abs == Catch::Approx(0.4));
    REQUIRE(d.rms == Catch::Approx(std::sqrt((0.09 + 0.16) / 12.0)));
    b.times[1] = 2.0;
    REQUIRE_THROWS_AS(deviation(a, b), PreconditionError);
}

TEST_CASE("conservation suite passes on a small scenario", "[harness]") {
    const auto r = run_conservation_suite(small_scenario());
    for (const auto& c : r.criteria) INFO(c.id << " = " << c.value);
    REQUIRE(r.passed());
    REQUIRE(r.criteria.size() == 6);
}

TEST_CASE("zero coupling gives identical constant series from both engines", "[harness]") {
    auto s = small_scenario();
    s.params.lambda = s.params.lambda_inf = 0.0;
    const auto ode = run_engine(s, Engine::HeisenbergODE);
    const auto pert = run_engine(s, Engine::Perturbative);
    for (std::size_t k = 0; k < ode.times.size(); ++k) {
        for (int j = 0; j < 2; ++j) {
            REQUIRE(ode.values[k].S[j] == pert.values[k].S[j]);
            REQUIRE(ode.values[k].K[j] == pert.values[k].K[j]);
            REQUIRE(ode.values[k].S[j] == s.initial[j]);
        }
    }
}

TEST_CASE("scaling study validates its ladder", "[harness]") {
    const auto s = small_scenario();
    REQUIRE_THROWS_AS(run_scaling_study(s, {0.04, 0.02}), PreconditionError);
    REQUIRE_THROWS_AS(run_scaling_study(s, {0.04, 0.02, 0.015}), PreconditionError);
}

TEST_CASE("damping without reservoir coupling has rate zero", "[harness][damping]") {
    auto p = support::generic_params(0.0);
    p.gamma = {0.0, 0.0};
    p.Omega = {0.0, 0.0};
    const auto res = damping_study(p, {4, 8}, {2.0, 5.0, 51});
    REQUIRE(res.target == 0.0);
    for (const auto& run : res.runs) {
        REQUIRE(run.status == Status::Pass);
        REQUIRE(run.rate == 0.0);
    }
}

TEST_CASE("damping study requires the window to cover the resonance", "[harness][damping]") {
    auto p = support::generic_params(0.0);
    p.gamma = {0.3, 0.0};
    p.Omega = {5.0, 0.0};
    REQUIRE_THROWS_AS(damping_study(p, {8}, {2.0, 5.0, 51}), PreconditionError);
}

TEST_CASE("damping rate converges toward twice the amplitude rate", "[harness][damping]") {
    auto p = support::generic_params(0.0);
    p.gamma = {0.3, 0.0};
    p.Omega = {0.0, 0.0};
    p.Omega_r = {1.0, 1.0};
    const auto r = run_damping_study(p, {8, 16, 32}, {4.0, 12.0, 601});
    REQUIRE(r.metrics["target_rate"].get<double>() == Catch::Approx(2.0 * std::numbers::pi * 0.09));
    REQUIRE(r.passed());
}

TEST_CASE("compare reports are deterministic", "[harness]") {
    auto s = small_scenario();
    s.engines = {Engine::Exact, Engine::Perturbative};
    s.compare.suites = {"conservation", "engines"};
    const auto a = to_json(run_compare(s)).dump();
    const auto b = to_json(run_compare(s)).dump();
    REQUIRE(a == b);
}
