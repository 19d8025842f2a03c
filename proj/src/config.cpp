#include "nlkpz/config.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "nlkpz/error.hpp"

namespace nlkpz {

using json = nlohmann::json;

namespace {

const std::vector<std::string> kIds = {"quadratic_exactness", "convergence_dirichlet", "convergence_cauchy",
                                       "comparison",          "decay_bounded",         "decay_cauchy",
                                       "property_suite",      "picard_crosscheck"};

std::string_view method_name(Method m) {
    switch (m) {
        case Method::euler: return "euler";
        case Method::rk4: return "rk4";
        case Method::picard: return "picard";
    }
    return "?";
}

Method method_from(const std::string& s) {
    if (s == "euler") return Method::euler;
    if (s == "rk4") return Method::rk4;
    if (s == "picard") return Method::picard;
    throw ConfigError("unknown integrator method '" + s + "'");
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError("'" + where + "' must be an object");
    for (const auto& item : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
            throw ConfigError("unknown key '" + (where.empty() ? "" : where + ".") + item.key() + "'");
        }
    }
}

double get_double(const json& v, const std::string& name) {
    if (!v.is_number()) throw ConfigError("'" + name + "' must be a number");
    return v.get<double>();
}

long long get_int(const json& v, const std::string& name) {
    if (!v.is_number_integer()) throw ConfigError("'" + name + "' must be an integer");
    return v.get<long long>();
}

std::string get_string(const json& v, const std::string& name) {
    if (!v.is_string()) throw ConfigError("'" + name + "' must be a string");
    return v.get<std::string>();
}

void read(const json& j, const char* key, double& out, const std::string& where) {
    if (j.contains(key)) out = get_double(j.at(key), where + "." + key);
}

void read(const json& j, const char* key, int& out, const std::string& where) {
    if (j.contains(key)) out = static_cast<int>(get_int(j.at(key), where + "." + key));
}

void read(const json& j, const char* key, std::size_t& out, const std::string& where) {
    if (!j.contains(key)) return;
    const long long v = get_int(j.at(key), where + "." + key);
    if (v < 0) throw ConfigError("'" + where + "." + key + "' must be nonnegative");
    out = static_cast<std::size_t>(v);
}

void read(const json& j, const char* key, std::optional<double>& out, const std::string& where) {
    if (!j.contains(key)) return;
    if (j.at(key).is_null()) {
        out.reset();
    } else {
        out = get_double(j.at(key), where + "." + key);
    }
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::pair<double, double> read_interval(const json& v, const std::string& name) {
    if (!v.is_array() || v.size() != 2) throw ConfigError("'" + name + "' must be a [lo, hi] pair");
    return {get_double(v[0], name), get_double(v[1], name)};
}

void apply_overrides(ExperimentConfig& c, const json& j) {
    check_keys(j, {"experiment", "seed", "kernel", "normalization", "nonlinearity", "geometry", "epsilons", "horizon",
                   "reference", "integrator", "sampling", "runs", "property", "gates"},
               "");
    if (j.contains("seed")) {
        const long long s = get_int(j.at("seed"), "seed");
        if (s < 0) throw ConfigError("'seed' must be nonnegative");
        c.seed = static_cast<std::uint64_t>(s);
    }
    if (j.contains("kernel")) {
        const json& k = j.at("kernel");
        check_keys(k, {"profile", "dim", "radius"}, "kernel");
        if (k.contains("profile")) c.kernel.profile = profile_from_string(get_string(k.at("profile"), "kernel.profile"));
        read(k, "dim", c.kernel.dim, "kernel");
        read(k, "radius", c.kernel.radius, "kernel");
    }
    if (j.contains("normalization")) {
        c.normalization = normalization_from_string(get_string(j.at("normalization"), "normalization"));
    }
    if (j.contains("nonlinearity")) {
        const json& n = j.at("nonlinearity");
        check_keys(n, {"kind", "mu"}, "nonlinearity");
        if (n.contains("kind")) c.nonlinearity.kind = get_string(n.at("kind"), "nonlinearity.kind");
        if (n.contains("mu")) {
            const json& m = n.at("mu");
            if (m.is_string()) {
                c.nonlinearity.mu_csv = m.get<std::string>();
            } else {
                c.nonlinearity.mu = get_double(m, "nonlinearity.mu");
                c.nonlinearity.mu_csv.clear();
            }
        }
        if (c.nonlinearity.kind != "kpz" && c.nonlinearity.kind != "identity") {
            throw ConfigError("nonlinearity.kind must be 'kpz' or 'identity'");
        }
    }
    if (j.contains("geometry")) {
        const json& g = j.at("geometry");
        check_keys(g, {"box", "h", "k_pts", "half_width", "initial_width", "contamination_tol"}, "geometry");
        if (g.contains("box")) {
            const json& b = g.at("box");
            c.geometry.box.clear();
            if (b.is_array() && b.size() == 2 && b[0].is_number()) {
                c.geometry.box.push_back(read_interval(b, "geometry.box"));
            } else if (b.is_array()) {
                for (const auto& axis : b) c.geometry.box.push_back(read_interval(axis, "geometry.box"));
            } else {
                throw ConfigError("'geometry.box' must be [lo, hi] or a list of them");
            }
        }
        read(g, "h", c.geometry.h, "geometry");
        read(g, "k_pts", c.geometry.k_pts, "geometry");
        read(g, "half_width", c.geometry.half_width, "geometry");
        read(g, "initial_width", c.geometry.initial_width, "geometry");
        read(g, "contamination_tol", c.geometry.contamination_tol, "geometry");
    }
    if (j.contains("epsilons")) {
        const json& e = j.at("epsilons");
        if (!e.is_array()) throw ConfigError("'epsilons' must be an array");
        c.epsilons.clear();
        for (const auto& v : e) c.epsilons.push_back(get_double(v, "epsilons"));
    }
    read(j, "horizon", c.horizon, "");
    if (j.contains("reference")) {
        const json& r = j.at("reference");
        check_keys(r, {"amplitude", "variance"}, "reference");
        read(r, "amplitude", c.reference.amplitude, "reference");
        read(r, "variance", c.reference.variance, "reference");
    }
    if (j.contains("integrator")) {
        const json& i = j.at("integrator");
        check_keys(i, {"method", "cfl_safety", "dt", "picard"}, "integrator");
        if (i.contains("method")) c.integrator.method = method_from(get_string(i.at("method"), "integrator.method"));
        read(i, "cfl_safety", c.integrator.cfl_safety, "integrator");
        read(i, "dt", c.integrator.dt, "integrator");
        if (i.contains("picard")) {
            const json& p = i.at("picard");
            check_keys(p, {"M", "tolerance", "max_sweeps", "dt"}, "integrator.picard");
            read(p, "M", c.integrator.picard.M, "integrator.picard");
            read(p, "tolerance", c.integrator.picard.tolerance, "integrator.picard");
            read(p, "max_sweeps", c.integrator.picard.max_sweeps, "integrator.picard");
            read(p, "dt", c.integrator.picard.dt, "integrator.picard");
        }
    }
    if (j.contains("sampling")) {
        const json& s = j.at("sampling");
        check_keys(s, {"count", "per_decade", "t_min", "fit_window"}, "sampling");
        read(s, "count", c.sampling.count, "sampling");
        read(s, "per_decade", c.sampling.per_decade, "sampling");
        read(s, "t_min", c.sampling.t_min, "sampling");
        if (s.contains("fit_window")) {
            const auto w = read_interval(s.at("fit_window"), "sampling.fit_window");
            c.sampling.fit_lo = w.first;
            c.sampling.fit_hi = w.second;
        }
    }
    if (j.contains("runs")) {
        const json& r = j.at("runs");
        if (!r.is_array()) throw ConfigError("'runs' must be an array");
        c.runs.clear();
        for (const auto& item : r) {
            check_keys(item, {"mu", "horizon"}, "runs[]");
            RunConfig run;
            read(item, "mu", run.mu, "runs[]");
            read(item, "horizon", run.horizon, "runs[]");
            c.runs.push_back(run);
        }
    }
    if (j.contains("property")) {
        const json& p = j.at("property");
        check_keys(p, {"samples", "fields", "pairs"}, "property");
        read(p, "samples", c.property.samples, "property");
        read(p, "fields", c.property.fields, "property");
        read(p, "pairs", c.property.pairs, "property");
    }
    if (j.contains("gates")) {
        const json& g = j.at("gates");
        if (!g.is_object()) throw ConfigError("'gates' must be an object");
        for (const auto& item : g.items()) {
            auto it = c.gates.find(item.key());
            if (it == c.gates.end()) throw ConfigError("unknown gate '" + item.key() + "' for experiment " + c.id);
            it->second = get_double(item.value(), "gates." + item.key());
        }
    }
}

void validate(const ExperimentConfig& c) {
    if (c.kernel.dim != 1 && c.kernel.dim != 2) throw ConfigError("kernel.dim must be 1 or 2");
    if (static_cast<int>(c.geometry.box.size()) != c.kernel.dim) {
        throw ConfigError("geometry.box needs one interval per kernel dimension");
    }
    for (const auto& [lo, hi] : c.geometry.box) {
        if (!(hi > lo)) throw ConfigError("geometry.box intervals must have lo < hi");
    }
    if (!(c.horizon > 0.0)) throw ConfigError("horizon must be positive");
    for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
        if (!(c.epsilons[i] > 0.0)) throw ConfigError("epsilons must be positive");
        if (i > 0 && !(c.epsilons[i] < c.epsilons[i - 1])) throw ConfigError("epsilons must be strictly decreasing");
    }
    if (!(c.integrator.cfl_safety > 0.0 && c.integrator.cfl_safety <= 1.0)) {
        throw ConfigError("integrator.cfl_safety must lie in (0, 1]");
    }
    if (!(c.integrator.picard.tolerance > 0.0)) throw ConfigError("integrator.picard.tolerance must be positive");
    if (c.sampling.count < 2) throw ConfigError("sampling.count must be at least 2");
    if (c.sampling.per_decade < 1) throw ConfigError("sampling.per_decade must be positive");
    if (c.geometry.k_pts < 1) throw ConfigError("geometry.k_pts must be positive");
    if (!(c.reference.amplitude > -1.0) || !(c.reference.variance > 0.0)) {
        throw ConfigError("reference needs amplitude > -1 and variance > 0");
    }
}

}  // namespace

std::vector<std::string> experiment_ids() { return kIds; }

ExperimentConfig default_config(const std::string& id) {
    ExperimentConfig c;
    c.id = id;
    if (id == "quadratic_exactness") {
        c.normalization = Normalization::mass_moment;
        c.nonlinearity.kind = "identity";
        c.epsilons = {0.2, 0.1};
        c.gates = {{"tolerance", 1e-8}, {"max_seconds", 1.0}};
    } else if (id == "convergence_dirichlet" || id == "convergence_cauchy") {
        c.normalization = Normalization::mass_moment;
        c.nonlinearity.mu = 1.0;
        c.epsilons = {0.2, 0.1, 0.05, 0.025};
        c.horizon = 0.25;
        c.integrator.cfl_safety = 1.0;
        c.gates = {{"min_order", 0.9}, {"surrogate_margin", 10.0}};
    } else if (id == "comparison") {
        c.kernel.radius = 0.5;
        c.geometry.h = 1.0 / 16.0;
        c.horizon = 2.0;
        c.integrator.method = Method::euler;
        c.integrator.cfl_safety = 1.0;
        c.property.pairs = 20;
        c.gates = {{"gap_tolerance", 1e-8}, {"bound_tolerance", 1e-10}};
    } else if (id == "decay_bounded") {
        c.geometry.h = 0.125;
        c.reference = {1.0, 0.1};
        c.runs = {{-1.0, 50.0}, {1.0, 100.0}};
        c.sampling.count = 201;
        c.gates = {{"sup_ratio", 1e-3}, {"rate_slack", 0.1}};
    } else if (id == "decay_cauchy") {
        c.geometry.h = 0.25;
        c.reference = {1.0, 1.0};
        c.runs = {{-0.5, 1000.0}, {0.5, 1000.0}};
        c.gates = {{"absorption_l2_lo", -0.35}, {"absorption_l2_hi", -0.15}, {"reaction_l2sq_lo", -0.7},
                   {"reaction_l2sq_hi", -0.3},  {"mass_step_tol", 1e-10},    {"energy_slack", 1e-8}};
    } else if (id == "property_suite") {
        c.geometry.h = 0.125;
        c.gates = {{"dj_rel_tol", 1e-6}, {"class_tol", 1e-12}, {"gns_spread", 10.0}};
    } else if (id == "picard_crosscheck") {
        c.kernel.radius = 0.15;
        c.geometry.box = {{0.0, 1.0}};
        c.geometry.h = 1.0 / 31.0;
        c.horizon = 0.5;
        c.integrator.method = Method::picard;
        c.integrator.picard.dt = 0.01;
        c.integrator.cfl_safety = 0.1;
        c.gates = {{"agreement_factor", 10.0}};
    } else {
        throw ConfigError("unknown experiment id '" + id + "'");
    }
    return c;
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("experiment")) throw ConfigError("config needs an 'experiment' id");
    ExperimentConfig c = default_config(get_string(j.at("experiment"), "experiment"));
    apply_overrides(c, j);
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string to_json(const ExperimentConfig& c) {
    json j;
    j["experiment"] = c.id;
    j["seed"] = c.seed;
    j["kernel"] = {{"profile", std::string(to_string(c.kernel.profile))}, {"dim", c.kernel.dim}, {"radius", c.kernel.radius}};
    j["normalization"] = std::string(to_string(c.normalization));
    j["nonlinearity"] = {{"kind", c.nonlinearity.kind}};
    if (c.nonlinearity.mu_csv.empty()) {
        j["nonlinearity"]["mu"] = c.nonlinearity.mu;
    } else {
        j["nonlinearity"]["mu"] = c.nonlinearity.mu_csv;
    }
    json box = json::array();
    for (const auto& [lo, hi] : c.geometry.box) box.push_back({lo, hi});
    j["geometry"] = {{"box", box},
                     {"h", opt(c.geometry.h)},
                     {"k_pts", c.geometry.k_pts},
                     {"half_width", opt(c.geometry.half_width)},
                     {"initial_width", c.geometry.initial_width},
                     {"contamination_tol", c.geometry.contamination_tol}};
    j["epsilons"] = c.epsilons;
    j["horizon"] = c.horizon;
    j["reference"] = {{"amplitude", c.reference.amplitude}, {"variance", c.reference.variance}};
    j["integrator"] = {{"method", std::string(method_name(c.integrator.method))},
                       {"cfl_safety", c.integrator.cfl_safety},
                       {"dt", opt(c.integrator.dt)},
                       {"picard",
                        {{"M", opt(c.integrator.picard.M)},
                         {"tolerance", c.integrator.picard.tolerance},
                         {"max_sweeps", c.integrator.picard.max_sweeps},
                         {"dt", opt(c.integrator.picard.dt)}}}};
    j["sampling"] = {{"count", c.sampling.count},
                     {"per_decade", c.sampling.per_decade},
                     {"t_min", c.sampling.t_min},
                     {"fit_window", {c.sampling.fit_lo, c.sampling.fit_hi}}};
    json runs = json::array();
    for (const auto& r : c.runs) runs.push_back({{"mu", r.mu}, {"horizon", r.horizon}});
    j["runs"] = runs;
    j["property"] = {{"samples", c.property.samples}, {"fields", c.property.fields}, {"pairs", c.property.pairs}};
    j["gates"] = c.gates;
    return j.dump(2) + "\n";
}

std::vector<std::pair<double, double>> read_mu_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open mu CSV " + path.string());
    std::string line;
    std::getline(in, line);
    std::vector<std::pair<double, double>> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string a, b;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b)) throw ConfigError("malformed mu CSV line: " + line);
        try {
            out.emplace_back(std::stod(a), std::stod(b));
        } catch (const std::exception&) {
            throw ConfigError("malformed mu CSV line: " + line);
        }
    }
    if (out.size() < 2) throw ConfigError("mu CSV needs at least two samples");
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (!(out[i].first > out[i - 1].first)) throw ConfigError("mu CSV x values must increase");
    }
    return out;
}

}  // namespace nlkpz
