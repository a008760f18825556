#include "infotrade/commands.hpp"

#include "infotrade/errors.hpp"
#include "infotrade/harness.hpp"
#include "infotrade/perturb.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace infotrade::commands {

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot open output file " + path.string());
    f << text;
    if (!f.flush()) throw ConfigError("cannot write output file " + path.string());
}

Scenario load(const Options& o) {
    auto s = load_scenario(o.config);
    if (o.engines) {
        s.engines = parse_engine_list(*o.engines);
        s.validate();
    }
    return s;
}

std::filesystem::path out_dir(const Options& o) {
    std::filesystem::path dir(o.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

}  // namespace

int report_error(std::exception_ptr e, std::ostream& err) {
    try {
        std::rethrow_exception(e);
    } catch (const ConfigError& x) {
        err << "config error: " << x.what() << "\n";
        return Config;
    } catch (const PreconditionError& x) {
        err << "precondition: " << x.what() << "\n";
        return Precondition;
    } catch (const NumericalGuardError& x) {
        err << "numerical guard: " << x.what() << "\n";
        return NumericalGuard;
    } catch (const std::invalid_argument& x) {
        err << "precondition: " << x.what() << "\n";
        return Precondition;
    } catch (const std::exception& x) {
        err << "error: " << x.what() << "\n";
        return NumericalGuard;
    }
}

std::string run_csv(const propagate::TimeSeries& ts) {
    std::string out = "t,n1,n2,k1,k2,I1_mean,I2_mean,Pi1,Pi2,M1,M2,leakage\n";
    for (std::size_t k = 0; k < ts.times.size(); ++k) {
        const auto& o = ts.values[k];
        const double row[] = {ts.times[k], o.S[0], o.S[1], o.K[0], o.K[1], o.I[0], o.I[1],
                              o.Pi[0],     o.Pi[1], o.M[0], o.M[1], o.leakage};
        for (std::size_t c = 0; c < std::size(row); ++c) {
            if (c) out += ',';
            out += fmt(row[c]);
        }
        out += '\n';
    }
    return out;
}

std::string asymptote_csv(const Scenario& s) {
    if (s.sweep.empty()) throw ConfigError("sweep: asymptote needs at least one axis");
    std::size_t cells = 1;
    for (const auto& a : s.sweep) cells *= a.values.size();

    struct Cell {
        bool defined = false;
        std::array<double, 2> dpi{};
        bool conditions = false;
    };
    std::vector<Cell> result(cells);
    std::vector<std::vector<double>> coords(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        std::size_t rest = c;
        coords[c].resize(s.sweep.size());
        for (std::size_t a = s.sweep.size(); a-- > 0;) {
            const auto& vals = s.sweep[a].values;
            coords[c][a] = vals[rest % vals.size()];
            rest /= vals.size();
        }
    }

    harness::parallel_for(cells, [&](std::size_t c) {
        Scenario cell = s;
        for (std::size_t a = 0; a < s.sweep.size(); ++a) cell = with_field(cell, s.sweep[a].field, coords[c][a]);
        const auto p = cell.model_params();
        const double k1 = model::damping_rate(p, 1);
        const double k2 = model::damping_rate(p, 2);
        auto& out = result[c];
        if (!(k1 > 0.0) || !(k2 > 0.0)) return;
        out.defined = true;
        out.dpi = perturb::delta_pi_infinity({p, cell.initial});
        // Trader 1 better placed on every count: more LoI, closer to both
        // resonances, narrower line.
        const auto det = [&](int j) {
            return std::array<double, 2>{std::abs(p.omega_s[j] - p.Omega[j]), std::abs(p.omega_c[j] - p.Omega[j])};
        };
        const auto d1 = det(0), d2 = det(1);
        out.conditions = cell.initial[4] > cell.initial[5] && d1[0] < d2[0] && d1[1] < d2[1] && k1 < k2;
    });

    std::string csv;
    for (const auto& a : s.sweep) csv += a.field + ',';
    csv += "dPi1_inf,dPi2_inf,sum,trader1_greater,conditions_hold\n";
    for (std::size_t c = 0; c < cells; ++c) {
        for (double v : coords[c]) csv += fmt(v) + ',';
        const auto& r = result[c];
        if (!r.defined) {
            csv += "nan,nan,nan,undefined,undefined\n";
            continue;
        }
        csv += fmt(r.dpi[0]) + ',' + fmt(r.dpi[1]) + ',' + fmt(r.dpi[0] + r.dpi[1]) + ',';
        csv += r.dpi[0] > r.dpi[1] ? "true," : "false,";
        csv += r.conditions ? "true\n" : "false\n";
    }
    return csv;
}

int cmd_run(const Options& o, std::ostream& out, std::ostream& err) {
    try {
        const auto s = load(o);
        const auto dir = out_dir(o);
        std::vector<propagate::TimeSeries> series(s.engines.size());
        harness::parallel_for(series.size(), [&](std::size_t k) { series[k] = harness::run_engine(s, s.engines[k]); });
        for (const auto& ts : series) {
            const auto path = dir / (s.name + "_" + propagate::to_string(ts.engine) + ".csv");
            write_file(path, run_csv(ts));
            if (!o.quiet) {
                for (const auto& w : ts.warnings) err << "warning (" << propagate::to_string(ts.engine) << "): " << w << "\n";
                out << path.string() << "\n";
            }
        }
        return Ok;
    } catch (...) {
        return report_error(std::current_exception(), err);
    }
}

int cmd_compare(const Options& o, std::ostream& out, std::ostream& err) {
    try {
        const auto s = load(o);
        const auto dir = out_dir(o);
        const auto report = harness::run_compare(s);
        write_file(dir / (s.name + "_report.json"), harness::to_json(report).dump(2) + "\n");
        if (!o.quiet) out << harness::summary(report);
        if (!report.passed()) {
            for (const auto& c : report.criteria) {
                if (c.status != harness::Status::Pass)
                    err << "criterion " << c.id << ": " << harness::to_string(c.status) << " value " << c.value
                        << " (" << c.threshold << ") " << c.detail << "\n";
            }
            return CriteriaFailed;
        }
        return Ok;
    } catch (...) {
        return report_error(std::current_exception(), err);
    }
}

int cmd_asymptote(const Options& o, std::ostream& out, std::ostream& err) {
    try {
        const auto s = load(o);
        const auto dir = out_dir(o);
        const auto path = dir / (s.name + "_asymptote.csv");
        write_file(path, asymptote_csv(s));
        if (!o.quiet) out << path.string() << "\n";
        return Ok;
    } catch (...) {
        return report_error(std::current_exception(), err);
    }
}

}  // namespace infotrade::commands
