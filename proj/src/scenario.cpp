#include "infotrade/scenario.hpp"

#include "infotrade/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace infotrade {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

// Object whose keys must come from a fixed set.
class Fields {
public:
    Fields(const json& obj, std::string path, std::initializer_list<const char*> allowed)
        : obj_(obj), path_(std::move(path)) {
        if (!obj.is_object()) fail(path_, "expected an object");
        const std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& [key, value] : obj.items()) {
            if (!ok.contains(key)) fail(at(key), "unknown key");
        }
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    const json* find(const std::string& key) const {
        const auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }
    const json& require(const std::string& key) const {
        const auto* v = find(key);
        if (!v) fail(at(key), "missing required key");
        return *v;
    }

private:
    const json& obj_;
    std::string path_;
};

double number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "must be finite");
    return v;
}

int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    const auto v = j.get<long long>();
    if (v < -1000000000LL || v > 1000000000LL) fail(path, "integer out of range");
    return static_cast<int>(v);
}

std::array<double, 2> pair(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) fail(path, "expected an array of 2 numbers");
    return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

std::string text(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

template <class T, class F>
std::vector<T> list(const json& j, const std::string& path, F&& item) {
    if (!j.is_array()) fail(path, "expected an array");
    std::vector<T> out;
    for (std::size_t k = 0; k < j.size(); ++k) out.push_back(item(j[k], path + "[" + std::to_string(k) + "]"));
    return out;
}

template <class F>
void optional(const Fields& f, const std::string& key, F&& read) {
    if (const auto* v = f.find(key)) read(*v, f.at(key));
}

const std::vector<std::string>& known_suites() {
    static const std::vector<std::string> suites{"conservation", "engines", "scaling", "damping"};
    return suites;
}

const std::vector<std::string>& known_sweep_fields() {
    static const std::vector<std::string> fields{"omega_s1", "omega_s2", "omega_c1", "omega_c2", "Omega1",
                                                 "Omega2",   "gamma1",   "gamma2",   "Omega_r1", "Omega_r2",
                                                 "I1",       "I2",       "lambda"};
    return fields;
}

bool contains(const std::vector<std::string>& v, const std::string& x) {
    return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

model::ModelParams Scenario::model_params() const {
    model::ModelParams p = params;
    for (auto& grid : p.reservoir_grid) grid = model::midpoint_grid(reservoir.window, reservoir.nodes);
    return p;
}

fock::ModeLayout Scenario::layout() const {
    return fock::build_layout(cutoffs.trader(), {reservoir.nodes, reservoir.nodes}, cutoffs.reservoir, max_dimension);
}

std::vector<double> Scenario::times() const { return propagate::uniform_times(time.t_max, time.samples); }

propagate::EvolveOptions Scenario::evolve_options() const {
    propagate::EvolveOptions o;
    o.tol = tolerances.propagation;
    o.leakage_error = tolerances.leakage_error;
    o.leakage_warning = tolerances.leakage_warning;
    return o;
}

propagate::HeisenbergOptions Scenario::heisenberg_options() const {
    return {tolerances.ode_step, tolerances.ode_tol, ode_form};
}

void Scenario::validate() const {
    if (name.empty()) fail("name", "must not be empty");
    for (char ch : name) {
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.')) {
            fail("name", "may only contain letters, digits, '_', '-' and '.'");
        }
    }
    const std::array<const char*, 4> cut_names{"share", "cash", "info", "reservoir"};
    const std::array<int, 4> cuts{cutoffs.share, cutoffs.cash, cutoffs.info, cutoffs.reservoir};
    for (std::size_t k = 0; k < 4; ++k) {
        if (cuts[k] < 1) fail(std::string("cutoffs.") + cut_names[k], "must be >= 1");
    }
    const std::array<const char*, 6> occ_names{"n1", "n2", "k1", "k2", "I1", "I2"};
    const auto trader_cuts = cutoffs.trader();
    for (std::size_t k = 0; k < 6; ++k) {
        if (initial[k] < 0) fail(std::string("initial.") + occ_names[k], "must be >= 0");
        if (initial[k] > trader_cuts[k]) {
            // Cutoff overflow is a model precondition, not a schema error.
            throw PreconditionError(std::string("initial.") + occ_names[k] + ": exceeds its cutoff " +
                                    std::to_string(trader_cuts[k]));
        }
    }
    if (reservoir.nodes < 0) fail("reservoir.nodes", "must be >= 0");
    if (!(reservoir.window > 0.0)) fail("reservoir.window", "must be > 0");
    if (!(time.t_max > 0.0)) fail("time.t_max", "must be > 0");
    if (time.samples < 2) fail("time.samples", "must be >= 2");
    const std::array<std::pair<const char*, double>, 5> tols{{{"propagation", tolerances.propagation},
                                                              {"leakage_error", tolerances.leakage_error},
                                                              {"leakage_warning", tolerances.leakage_warning},
                                                              {"ode_step", tolerances.ode_step},
                                                              {"ode_tol", tolerances.ode_tol}}};
    for (const auto& [key, v] : tols) {
        if (!(v > 0.0)) fail(std::string("tolerances.") + key, "must be > 0");
    }
    if (engines.empty()) fail("engines", "must list at least one engine");
    for (std::size_t a = 0; a < engines.size(); ++a) {
        for (std::size_t b = a + 1; b < engines.size(); ++b) {
            if (engines[a] == engines[b]) fail("engines", "duplicate engine " + propagate::to_string(engines[a]));
        }
    }
    if (max_dimension < 1) fail("max_dimension", "must be >= 1");
    for (const auto& s : compare.suites) {
        if (!contains(known_suites(), s)) fail("compare.suites", "unknown suite '" + s + "'");
    }
    for (double e : compare.epsilons) {
        if (!(e > 0.0)) fail("compare.epsilons", "values must be > 0");
    }
    for (int g : compare.grid_sizes) {
        if (g < 1) fail("compare.grid_sizes", "values must be >= 1");
    }
    if (!(compare.damping.window > 0.0)) fail("compare.damping.window", "must be > 0");
    if (!(compare.damping.t_max > 0.0)) fail("compare.damping.t_max", "must be > 0");
    if (compare.damping.samples < 2) fail("compare.damping.samples", "must be >= 2");
    for (std::size_t k = 0; k < sweep.size(); ++k) {
        const std::string path = "sweep.axes[" + std::to_string(k) + "]";
        if (!contains(known_sweep_fields(), sweep[k].field)) fail(path + ".field", "unknown field '" + sweep[k].field + "'");
        if (sweep[k].values.empty()) fail(path + ".values", "must not be empty");
        if (sweep[k].field == "I1" || sweep[k].field == "I2") {
            for (double v : sweep[k].values) {
                if (v < 0.0 || v != std::floor(v)) fail(path + ".values", "occupations must be non-negative integers");
            }
        }
    }
}

bool operator==(const Scenario& a, const Scenario& b) {
    return a.name == b.name && a.params == b.params && a.initial == b.initial && a.cutoffs == b.cutoffs &&
           a.reservoir == b.reservoir && a.time == b.time && a.engines == b.engines && a.ode_form == b.ode_form &&
           a.tolerances == b.tolerances && a.max_dimension == b.max_dimension && a.compare == b.compare &&
           a.sweep == b.sweep;
}

Engine parse_engine(const std::string& name) {
    if (name == "exact") return Engine::Exact;
    if (name == "ode") return Engine::HeisenbergODE;
    if (name == "perturb") return Engine::Perturbative;
    throw ConfigError("engines: unknown engine '" + name + "' (expected exact, ode or perturb)");
}

std::vector<Engine> parse_engine_list(const std::string& comma_separated) {
    std::vector<Engine> out;
    std::stringstream in(comma_separated);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto last = item.find_last_not_of(" \t");
        out.push_back(parse_engine(item.substr(first, last - first + 1)));
    }
    if (out.empty()) throw ConfigError("engines: empty engine list");
    return out;
}

json to_json(const Scenario& s) {
    const auto arr = [](const std::array<double, 2>& v) { return json::array({v[0], v[1]}); };
    json doc;
    doc["name"] = s.name;
    doc["params"] = {{"omega_s", arr(s.params.omega_s)},
                     {"omega_c", arr(s.params.omega_c)},
                     {"Omega", arr(s.params.Omega)},
                     {"lambda_inf", s.params.lambda_inf},
                     {"lambda", s.params.lambda},
                     {"gamma", arr(s.params.gamma)},
                     {"Omega_r", arr(s.params.Omega_r)}};
    doc["initial"] = {{"n1", s.initial[0]}, {"n2", s.initial[1]}, {"k1", s.initial[2]},
                      {"k2", s.initial[3]}, {"I1", s.initial[4]}, {"I2", s.initial[5]}};
    doc["cutoffs"] = {{"share", s.cutoffs.share},
                      {"cash", s.cutoffs.cash},
                      {"info", s.cutoffs.info},
                      {"reservoir", s.cutoffs.reservoir}};
    doc["reservoir"] = {{"window", s.reservoir.window}, {"nodes", s.reservoir.nodes}};
    doc["time"] = {{"t_max", s.time.t_max}, {"samples", s.time.samples}};
    doc["engines"] = json::array();
    for (auto e : s.engines) doc["engines"].push_back(propagate::to_string(e));
    doc["ode_form"] = propagate::to_string(s.ode_form);
    doc["tolerances"] = {{"propagation", s.tolerances.propagation},
                         {"leakage_error", s.tolerances.leakage_error},
                         {"leakage_warning", s.tolerances.leakage_warning},
                         {"ode_step", s.tolerances.ode_step},
                         {"ode_tol", s.tolerances.ode_tol}};
    doc["max_dimension"] = s.max_dimension;
    doc["compare"] = {{"suites", s.compare.suites},
                      {"epsilons", s.compare.epsilons},
                      {"grid_sizes", s.compare.grid_sizes},
                      {"damping",
                       {{"window", s.compare.damping.window},
                        {"t_max", s.compare.damping.t_max},
                        {"samples", s.compare.damping.samples}}}};
    json axes = json::array();
    for (const auto& a : s.sweep) axes.push_back({{"field", a.field}, {"values", a.values}});
    doc["sweep"] = {{"axes", axes}};
    return doc;
}

Scenario scenario_from_json(const json& doc) {
    const Fields top(doc, "",
                     {"name", "params", "initial", "cutoffs", "reservoir", "time", "engines", "ode_form", "tolerances",
                      "max_dimension", "compare", "sweep"});
    Scenario s;
    s.name = text(top.require("name"), "name");

    const Fields p(top.require("params"), "params",
                   {"omega_s", "omega_c", "Omega", "lambda_inf", "lambda", "gamma", "Omega_r"});
    s.params.omega_s = pair(p.require("omega_s"), p.at("omega_s"));
    s.params.omega_c = pair(p.require("omega_c"), p.at("omega_c"));
    s.params.Omega = pair(p.require("Omega"), p.at("Omega"));
    s.params.lambda_inf = number(p.require("lambda_inf"), p.at("lambda_inf"));
    s.params.lambda = number(p.require("lambda"), p.at("lambda"));
    s.params.gamma = pair(p.require("gamma"), p.at("gamma"));
    optional(p, "Omega_r", [&](const json& v, const std::string& path) { s.params.Omega_r = pair(v, path); });

    const Fields ini(top.require("initial"), "initial", {"n1", "n2", "k1", "k2", "I1", "I2"});
    const std::array<const char*, 6> occ_names{"n1", "n2", "k1", "k2", "I1", "I2"};
    for (std::size_t k = 0; k < 6; ++k) s.initial[k] = integer(ini.require(occ_names[k]), ini.at(occ_names[k]));

    optional(top, "cutoffs", [&](const json& v, const std::string& path) {
        const Fields f(v, path, {"share", "cash", "info", "reservoir"});
        optional(f, "share", [&](const json& x, const std::string& q) { s.cutoffs.share = integer(x, q); });
        optional(f, "cash", [&](const json& x, const std::string& q) { s.cutoffs.cash = integer(x, q); });
        optional(f, "info", [&](const json& x, const std::string& q) { s.cutoffs.info = integer(x, q); });
        optional(f, "reservoir", [&](const json& x, const std::string& q) { s.cutoffs.reservoir = integer(x, q); });
    });
    optional(top, "reservoir", [&](const json& v, const std::string& path) {
        const Fields f(v, path, {"window", "nodes"});
        optional(f, "window", [&](const json& x, const std::string& q) { s.reservoir.window = number(x, q); });
        optional(f, "nodes", [&](const json& x, const std::string& q) { s.reservoir.nodes = integer(x, q); });
    });
    optional(top, "time", [&](const json& v, const std::string& path) {
        const Fields f(v, path, {"t_max", "samples"});
        optional(f, "t_max", [&](const json& x, const std::string& q) { s.time.t_max = number(x, q); });
        optional(f, "samples", [&](const json& x, const std::string& q) { s.time.samples = integer(x, q); });
    });
    optional(top, "engines", [&](const json& v, const std::string& path) {
        s.engines = list<Engine>(v, path, [](const json& x, const std::string& q) { return parse_engine(text(x, q)); });
    });
    optional(top, "ode_form", [&](const json& v, const std::string& path) {
        const auto name = text(v, path);
        if (name == "reduced") s.ode_form = propagate::HeisenbergForm::Reduced;
        else if (name == "commutator") s.ode_form = propagate::HeisenbergForm::Commutator;
        else fail(path, "expected reduced or commutator, got '" + name + "'");
    });
    optional(top, "tolerances", [&](const json& v, const std::string& path) {
        const Fields f(v, path, {"propagation", "leakage_error", "leakage_warning", "ode_step", "ode_tol"});
        auto& t = s.tolerances;
        optional(f, "propagation", [&](const json& x, const std::string& q) { t.propagation = number(x, q); });
        optional(f, "leakage_error", [&](const json& x, const std::string& q) { t.leakage_error = number(x, q); });
        optional(f, "leakage_warning", [&](const json& x, const std::string& q) { t.leakage_warning = number(x, q); });
        optional(f, "ode_step", [&](const json& x, const std::string& q) { t.ode_step = number(x, q); });
        optional(f, "ode_tol", [&](const json& x, const std::string& q) { t.ode_tol = number(x, q); });
    });
    optional(top, "max_dimension", [&](const json& v, const std::string& path) {
        if (!v.is_number_unsigned()) fail(path, "expected a positive integer");
        s.max_dimension = v.get<std::uint64_t>();
    });
    optional(top, "compare", [&](const json& v, const std::string& path) {
        const Fields f(v, path, {"suites", "epsilons", "grid_sizes", "damping"});
        auto& c = s.compare;
        optional(f, "suites", [&](const json& x, const std::string& q) { c.suites = list<std::string>(x, q, text); });
        optional(f, "epsilons", [&](const json& x, const std::string& q) { c.epsilons = list<double>(x, q, number); });
        optional(f, "grid_sizes", [&](const json& x, const std::string& q) { c.grid_sizes = list<int>(x, q, integer); });
        optional(f, "damping", [&](const json& x, const std::string& q) {
            const Fields d(x, q, {"window", "t_max", "samples"});
            optional(d, "window", [&](const json& y, const std::string& r) { c.damping.window = number(y, r); });
            optional(d, "t_max", [&](const json& y, const std::string& r) { c.damping.t_max = number(y, r); });
            optional(d, "samples", [&](const json& y, const std::string& r) { c.damping.samples = integer(y, r); });
        });
    });
    optional(top, "sweep", [&](const json& v, const std::string& path) {
        const Fields f(v, path, {"axes"});
        s.sweep = list<SweepAxis>(f.require("axes"), f.at("axes"), [](const json& x, const std::string& q) {
            const Fields a(x, q, {"field", "values"});
            return SweepAxis{text(a.require("field"), a.at("field")),
                             list<double>(a.require("values"), a.at("values"), number)};
        });
    });
    s.validate();
    return s;
}

std::string serialize(const Scenario& s) { return to_json(s).dump(2) + "\n"; }

Scenario parse_scenario(const std::string& text_in) {
    json doc;
    try {
        doc = json::parse(text_in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    return scenario_from_json(doc);
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

Scenario with_field(const Scenario& s, const std::string& field, double value) {
    Scenario out = s;
    auto& p = out.params;
    if (field == "omega_s1") p.omega_s[0] = value;
    else if (field == "omega_s2") p.omega_s[1] = value;
    else if (field == "omega_c1") p.omega_c[0] = value;
    else if (field == "omega_c2") p.omega_c[1] = value;
    else if (field == "Omega1") p.Omega[0] = value;
    else if (field == "Omega2") p.Omega[1] = value;
    else if (field == "gamma1") p.gamma[0] = value;
    else if (field == "gamma2") p.gamma[1] = value;
    else if (field == "Omega_r1") p.Omega_r[0] = value;
    else if (field == "Omega_r2") p.Omega_r[1] = value;
    else if (field == "lambda") p.lambda = p.lambda_inf = value;
    else if (field == "I1" || field == "I2") {
        if (value < 0.0 || value != std::floor(value)) throw ConfigError(field + ": must be a non-negative integer");
        out.initial[field == "I1" ? 4 : 5] = static_cast<int>(value);
    } else {
        throw ConfigError("sweep: unknown field '" + field + "'");
    }
    return out;
}

}  // namespace infotrade
