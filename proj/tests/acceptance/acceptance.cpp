// Acceptance run: one PASS/FAIL line per criterion, thresholds fixed here.
// Exit status is the number of failing criteria.

#include "infotrade/commands.hpp"
#include "infotrade/errors.hpp"
#include "infotrade/fock.hpp"
#include "infotrade/harness.hpp"
#include "infotrade/perturb.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include <unistd.h>

using namespace infotrade;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("CRITERION %2d %s: %s (%.2f s) %s\n", id, o.pass ? "PASS" : "FAIL", title, secs, o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

model::ModelParams generic_params(double lambda) {
    model::ModelParams p;
    p.omega_s = {1.3, 0.7};
    p.omega_c = {0.9, 1.6};
    p.Omega = {1.1, 1.2};
    p.lambda = p.lambda_inf = lambda;
    p.gamma = {0.3, 0.4};
    p.Omega_r = {1.0, 1.5};
    return p;
}

// n = (1, 0), k = (1, 1), I = (1, 1), cutoffs 3, two reservoir modes per trader.
Scenario generic_scenario() {
    Scenario s;
    s.name = "acceptance";
    s.params = generic_params(0.3);
    s.initial = {1, 0, 1, 1, 1, 1};
    s.cutoffs = {3, 3, 3, 3};
    s.reservoir = {4.0, 2};
    s.time = {10.0, 201};
    return s;
}

const harness::CriterionResult& find(const harness::ComparisonReport& r, const std::string& id) {
    for (const auto& c : r.criteria)
        if (c.id == id) return c;
    throw std::runtime_error("criterion " + id + " missing from report");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

int main() {
    criterion(1, "truncated CCR exact on every mode, cross-mode zero, D <= 4096 in < 1 s", [] {
        const auto t0 = std::chrono::steady_clock::now();
        const auto layout = std::make_shared<const fock::ModeLayout>(fock::build_layout({3, 3, 3, 3, 1, 1}, 1, 1));
        const auto basis = fock::Basis::full(layout);
        const std::size_t d = layout->dimension();
        bool exact = d <= 4096;
        double product_rounding = 0.0;
        for (std::size_t m = 0; m < layout->mode_count(); ++m) {
            const auto a = fock::annihilator(*layout, layout->modes()[m]);
            std::vector<double> expect(d);
            const int top = layout->cutoff(m);
            for (std::size_t k = 0; k < d; ++k) expect[k] = layout->occupation(k, m) == top ? -double(top) : 1.0;
            const auto target = fock::SparseOperator::diagonal(expect);
            const auto ccr = fock::materialize(
                basis, {{1.0, {fock::lower(m), fock::raise(m)}}, {-1.0, {fock::raise(m), fock::lower(m)}}});
            exact = exact && fock::max_abs_difference(ccr, target) == 0.0;
            product_rounding = std::max(product_rounding,
                                        fock::max_abs_difference(fock::commutator(a, fock::adjoint(a)), target));
            for (std::size_t n = m + 1; n < layout->mode_count(); ++n) {
                const auto b = fock::annihilator(*layout, layout->modes()[n]);
                exact = exact && fock::commutator(a, b).is_zero() && fock::commutator(a, fock::adjoint(b)).is_zero();
            }
        }
        const double secs = elapsed_since(t0);
        return Outcome{exact && secs < 1.0,
                       fmt("D = %g, exact = %g, stored-matrix product rounding %.1e, runtime %.3f s", double(d),
                           double(exact), product_rounding, secs)};
    });

    criterion(2, "<M_j> drift <= 1e-8 and leakage <= 1e-6 on t in [0,10], exact engine, < 1 min", [] {
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = harness::run_conservation_suite(generic_scenario());
        const double secs = elapsed_since(t0);
        const auto& m = find(r, "M_drift");
        const auto& l = find(r, "leakage");
        const bool ok = m.value <= 1e-8 && l.value <= 1e-6 && secs < 60.0;
        return Outcome{ok, fmt("M drift %.3e, leakage %.3e, sector dimension %g, runtime %.1f s", m.value, l.value,
                               r.metrics["sector"]["dimension"].get<double>(), secs)};
    });

    criterion(3, "lambda_inf = gamma = 0, lambda = 0.5: Pi drift <= 1e-10, S and K each vary > 1e-3", [] {
        auto s = generic_scenario();
        s.params.lambda = 0.5;
        const auto r = harness::run_conservation_suite(s);
        const auto& pi = find(r, "no_information_Pi_drift");
        const auto& sk = find(r, "no_information_S_K_variation");
        return Outcome{pi.value <= 1e-10 && sk.value > 1e-3,
                       fmt("Pi drift %.3e, smallest S/K variation %.3e", pi.value, sk.value)};
    });

    criterion(4, "interior ||[H, Pi_j] - lambda_inf (i^dag (s + c) - h.c.)||_max <= 1e-12", [] {
        const auto r = harness::run_conservation_suite(generic_scenario());
        const auto& c = find(r, "commutator_Pi");
        return Outcome{c.value <= 1e-12, fmt("residual %.3e", c.value)};
    });

    criterion(5, "first-order expansion leaves n_j, k_j unchanged to 1e-10 on t in [0,10]", [] {
        const perturb::PerturbInputs in{generic_params(0.1), {1, 2, 1, 1, 1, 2}};
        const auto layout = std::make_shared<const fock::ModeLayout>(fock::build_layout({3, 3, 3, 3, 3, 3}, 0, 1));
        const auto basis = fock::Basis::full(layout);
        const auto phi = fock::number_state(basis, in.occ);
        double worst = 0.0;
        for (int k = 0; k <= 20; ++k) {
            const double t = 0.5 * k;
            const auto e = perturb::expectation_by_order(perturb::build_perturbative_operators(basis, in, t), phi);
            const std::array<std::array<double, 3>, 4> rows{e.n1, e.n2, e.k1, e.k2};
            for (int m = 0; m < 4; ++m) {
                worst = std::max(worst, std::abs(rows[m][0] + in.params.lambda * rows[m][1] - in.occ[m]));
            }
        }
        return Outcome{worst <= 1e-10, fmt("max |first-order value - initial| = %.3e", worst)};
    });

    criterion(6, "trade brackets of n_j + k_j cancel exactly on [0,6]^4", [] {
        long long bad = 0, count = 0;
        for (long long n1 = 0; n1 <= 6; ++n1)
            for (long long n2 = 0; n2 <= 6; ++n2)
                for (long long k1 = 0; k1 <= 6; ++k1)
                    for (long long k2 = 0; k2 <= 6; ++k2) {
                        const auto b = perturb::trade_brackets(n1, n2, k1, k2);
                        bad += (b[0] + b[2] != 0) + (b[1] + b[3] != 0);
                        ++count;
                    }
        return Outcome{bad == 0, fmt("%g tuples, %g nonzero sums", double(count), double(bad))};
    });

    criterion(7, "epsilon ladder {0.04,0.02,0.01}: error slope in [2.5,3.5], dPi slope 2 +- 0.2, < 5 min", [] {
        const auto t0 = std::chrono::steady_clock::now();
        Scenario s;
        s.name = "scaling";
        s.params = generic_params(0.1);
        s.initial = {1, 2, 1, 1, 1, 2};
        s.cutoffs = {3, 3, 3, 1};
        s.time = {10.0, 101};
        const auto r = harness::run_scaling_study(s, {0.04, 0.02, 0.01});
        const double secs = elapsed_since(t0);
        const auto& e = find(r, "scaling_slope");
        const auto& d = find(r, "delta_pi_slope");
        std::string ladder;
        for (const auto& row : r.metrics["ladder"]) {
            ladder += fmt(" [eps %.2g: err %.3e, dPi %.3e]", row["epsilon"].get<double>(),
                          row["max_error"].get<double>(), row["delta_pi"].get<double>());
        }
        const bool ok = e.status == harness::Status::Pass && d.status == harness::Status::Pass && secs < 300.0;
        return Outcome{ok, fmt("error slope %.3f", e.value) + " (" + harness::to_string(e.status) + ")" +
                               fmt(", dPi slope %.3f (", d.value) + harness::to_string(d.status) +
                               fmt("), runtime %.1f s;", secs) + ladder};
    });

    criterion(8, "dPi_j(t) at t = 50 Omega_r/(pi gamma^2) within 1e-6 of the limit; resonant value 0.04 to 1e-12", [] {
        const perturb::PerturbInputs in{generic_params(0.1), {1, 2, 1, 1, 1, 2}};
        const auto inf = perturb::delta_pi_infinity(in);
        double worst = 0.0;
        for (int j = 0; j < 2; ++j) {
            const double t = 50.0 * in.params.Omega_r[j] / (std::numbers::pi * std::pow(in.params.gamma[j], 2));
            worst = std::max(worst, std::abs(perturb::delta_pi(in, t)[j] - inf[j]) / inf[j]);
        }
        auto p = generic_params(0.1);
        p.gamma = {1.0, 1.0};
        p.Omega_r = {std::numbers::pi, std::numbers::pi};
        p.omega_s[0] = p.omega_c[0] = p.Omega[0];
        const double peak = perturb::delta_pi_infinity({p, {0, 0, 0, 0, 2, 0}})[0];
        // 2 lambda^2 I1 Omega_r^2 / (pi^2 gamma^4)
        const double expect = 2.0 * 0.01 * 2.0 * std::pow(std::numbers::pi, 2) / std::pow(std::numbers::pi, 2);
        const double peak_err = std::abs(peak - expect);
        return Outcome{worst <= 1e-6 && peak_err <= 1e-12 && std::abs(expect - 0.04) < 1e-15,
                       fmt("max relative gap %.3e; resonant %.15g (error %.1e)", worst, peak, peak_err)};
    });

    criterion(9, "damping rate within 20% of 2 pi gamma^2 / Omega_r at 32 nodes, improving over {8,16,32}, < 5 min", [] {
        const auto t0 = std::chrono::steady_clock::now();
        model::ModelParams p;
        p.gamma = {0.3, 0.0};
        p.Omega = {0.0, 0.0};
        p.Omega_r = {1.0, 1.0};
        const auto r = harness::run_damping_study(p, {8, 16, 32}, {4.0, 12.0, 601});
        const double secs = elapsed_since(t0);
        std::string runs;
        for (const auto& run : r.metrics["runs"]) {
            runs += fmt(" [N %g: rate %.5f, rel. error %.4f]", run["nodes"].get<double>(), run["rate"].get<double>(),
                        run["relative_error"].get<double>());
        }
        const bool ok = r.passed() && secs < 300.0;
        return Outcome{ok, fmt("target %.5f, runtime %.1f s;", r.metrics["target_rate"].get<double>(), secs) + runs};
    });

    criterion(10, "sum of asymptotic shifts nonzero in >= 99% of cells; conditions imply trader 1 gains more", [] {
        Scenario s;
        s.name = "nonzero_sum";
        s.params.omega_s = {1.0, 1.0};
        s.params.omega_c = {1.0, 1.0};
        s.params.Omega = {1.0, 1.0};
        s.params.lambda = s.params.lambda_inf = 0.1;
        s.params.gamma = {0.3, 0.3};
        s.params.Omega_r = {1.0, 1.0};
        s.initial = {1, 1, 1, 1, 1, 1};
        s.sweep = {{"I1", {1, 2, 3}},
                   {"I2", {1, 2}},
                   {"gamma1", {0.1, 0.25, 0.4}},
                   {"gamma2", {0.2, 0.35}},
                   {"omega_s1", {0.7, 0.95, 1.15, 1.6}},
                   {"omega_s2", {0.6, 1.3}},
                   {"omega_c1", {0.8, 1.05, 1.4}},
                   {"omega_c2", {0.5, 1.45}},
                   {"Omega_r1", {0.8, 1.2}}};
        std::istringstream csv(commands::asymptote_csv(s));
        std::string line;
        std::getline(csv, line);
        long cells = 0, nonzero = 0, hold = 0, hold_ok = 0;
        while (std::getline(csv, line)) {
            std::vector<std::string> c;
            std::istringstream ls(line);
            std::string cell;
            while (std::getline(ls, cell, ',')) c.push_back(cell);
            const std::size_t n = c.size();
            ++cells;
            if (c[n - 3] != "nan" && std::stod(c[n - 3]) != 0.0) ++nonzero;
            if (c[n - 1] == "true") {
                ++hold;
                if (c[n - 2] == "true") ++hold_ok;
            }
        }
        const double frac = double(nonzero) / double(cells);
        return Outcome{frac >= 0.99 && hold > 0 && hold_ok == hold,
                       fmt("%g cells, nonzero sum in %.4f; conditions hold in %g cells, trader 1 greater in %g", double(cells),
                           frac, double(hold), double(hold_ok))};
    });

    criterion(11, "run and compare outputs byte-identical across two invocations", [] {
        const auto root = fs::temp_directory_path() / ("infotrade_acceptance_" + std::to_string(::getpid()));
        fs::remove_all(root);
        fs::create_directories(root);
        auto s = generic_scenario();
        s.name = "determinism";
        s.engines = {Engine::Exact, Engine::Perturbative};
        s.params = generic_params(0.1);
        s.compare.suites = {"conservation", "engines", "damping"};
        s.compare.damping = {4.0, 12.0, 601};
        std::ofstream(root / "config.json") << serialize(s);
        std::ostringstream out, err;
        bool same = true;
        std::vector<std::string> files;
        for (const char* name : {"determinism_exact.csv", "determinism_perturb.csv", "determinism_report.json"})
            files.push_back(name);
        std::array<std::vector<std::string>, 2> seen;
        for (int pass = 0; pass < 2; ++pass) {
            commands::Options o;
            o.config = (root / "config.json").string();
            o.out_dir = (root / ("out" + std::to_string(pass))).string();
            o.quiet = true;
            const int rc_run = commands::cmd_run(o, out, err);
            const int rc_cmp = commands::cmd_compare(o, out, err);
            if (rc_run != 0 || rc_cmp > 1) throw std::runtime_error("command failed: " + err.str());
            for (const auto& f : files) seen[pass].push_back(slurp(fs::path(o.out_dir) / f));
        }
        std::size_t bytes = 0;
        for (std::size_t k = 0; k < files.size(); ++k) {
            same = same && !seen[0][k].empty() && seen[0][k] == seen[1][k];
            bytes += seen[0][k].size();
        }
        fs::remove_all(root);
        return Outcome{same, fmt("%g files, %g bytes compared", double(files.size()), double(bytes))};
    });

    std::printf("%d criteria failed\n", failures);
    return failures;
}
