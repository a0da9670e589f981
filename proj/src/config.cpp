#include "nsplab/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace nsplab {

namespace pt = boost::property_tree;

namespace {

const char* kKindNames[] = {"semigroup-verify", "dispersive-scan", "phase-scan",
                            "splitting-run", "energy-campaign", "ion-suite"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// "2pi", "pi", "0.5" ...
double parse_number(const std::string& field, std::string v) {
    boost::algorithm::trim(v);
    double mult = 1;
    if (boost::algorithm::iends_with(v, "pi")) {
        mult = kPi;
        v.resize(v.size() - 2);
        boost::algorithm::trim(v);
        if (v.empty()) return kPi;
    }
    try {
        std::size_t used = 0;
        double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing");
        return x * mult;
    } catch (const std::exception&) {
        throw ConfigError(field, "not a number: '" + v + "'");
    }
}

long parse_integer(const std::string& field, const std::string& v) {
    double x = parse_number(field, v);
    if (x != std::floor(x) || std::fabs(x) > 1e15) throw ConfigError(field, "not an integer: '" + v + "'");
    return static_cast<long>(x);
}

bool parse_bool(const std::string& field, std::string v) {
    boost::algorithm::to_lower(v);
    boost::algorithm::trim(v);
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    throw ConfigError(field, "not a boolean: '" + v + "'");
}

std::vector<double> parse_list(const std::string& field, const std::string& v) {
    std::vector<std::string> parts;
    boost::algorithm::split(parts, v, boost::algorithm::is_any_of(","));
    std::vector<double> out;
    for (auto& p : parts) {
        boost::algorithm::trim(p);
        if (!p.empty()) out.push_back(parse_number(field, p));
    }
    return out;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s;
}

void require(bool ok, const char* field, const std::string& reason) {
    if (!ok) throw ConfigError(field, reason);
}

bool finite_pos(double x) { return std::isfinite(x) && x > 0; }

}  // namespace

ConfigError::ConfigError(std::string f, const std::string& reason)
    : std::invalid_argument(f + ": " + reason), field(std::move(f)) {}

const char* to_string(ExperimentKind k) { return kKindNames[static_cast<int>(k)]; }

ExperimentKind kind_from_string(const std::string& s) {
    for (int i = 0; i < 6; ++i)
        if (s == kKindNames[i]) return static_cast<ExperimentKind>(i);
    throw ConfigError("experiment.kind", "unknown kind '" + s + "'");
}

const char* to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::epsilon: return "epsilon";
        case SweepAxis::kappa0: return "kappa0";
        case SweepAxis::grid: return "grid";
    }
    return "?";
}

SweepAxis axis_from_string(const std::string& s) {
    if (s == "epsilon" || s == "eps") return SweepAxis::epsilon;
    if (s == "kappa0") return SweepAxis::kappa0;
    if (s == "grid" || s == "n") return SweepAxis::grid;
    throw ConfigError("sweep.axis", "unknown axis '" + s + "' (epsilon, kappa0 or grid)");
}

const std::map<std::string, double>& default_tolerances() {
    static const std::map<std::string, double> d{
        {"green_rel", 1e-10},      {"determinant", 1e-12},  {"damping_bound", 3.0},
        {"exponent_window", 0.15}, {"exponent_spread", 0.10}, {"phase_refine", 1.05},
        {"splitting", 1e-6},       {"curl", 1e-8},          {"perturb_ratio", 8.0},
        {"residual_refine", 0.10}, {"interp", 1e-10},       {"ion_exponent", 0.2},
        {"ion_bprime_slack", 1e-9},
    };
    return d;
}

double ExperimentConfig::tol(const std::string& key) const {
    if (auto it = tolerances.find(key); it != tolerances.end()) return it->second;
    auto& d = default_tolerances();
    auto it = d.find(key);
    if (it == d.end()) throw std::logic_error("no tolerance named " + key);
    return it->second;
}

ExperimentConfig parse_config(const std::string& text) {
    pt::ptree tree;
    std::istringstream is(text);
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("line " + std::to_string(e.line()), e.message());
    }

    ExperimentConfig c;
    std::set<std::string> seen;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) throw ConfigError(section, "key outside any section");
        for (const auto& [key, node] : body) {
            const std::string field = section + "." + key;
            const std::string v = boost::algorithm::trim_copy(node.data());
            if (!seen.insert(field).second) throw ConfigError(field, "given twice");
            if (section == "tolerance") {
                if (!default_tolerances().count(key)) throw ConfigError(field, "unknown tolerance");
                c.tolerances[key] = parse_number(field, v);
                continue;
            }
            if (field == "experiment.kind") c.kind = kind_from_string(v);
            else if (field == "experiment.seed") {
                long x = parse_integer(field, v);
                if (x < 0) throw ConfigError(field, "must be non-negative");
                c.seed = static_cast<std::uint64_t>(x);
            } else if (field == "experiment.output") c.output = v;
            else if (field == "experiment.theorem_mode") c.theorem_mode = parse_bool(field, v);
            else if (field == "grid.dim") c.dim = static_cast<int>(parse_integer(field, v));
            else if (field == "grid.n") c.n = static_cast<int>(parse_integer(field, v));
            else if (field == "grid.box_length") c.box_length = parse_number(field, v);
            else if (field == "physics.variant") {
                try {
                    c.variant = variant_from_string(v);
                } catch (const std::exception&) {
                    throw ConfigError(field, "expected electron or ion, got '" + v + "'");
                }
            } else if (field == "physics.epsilon") c.epsilons = parse_list(field, v);
            else if (field == "physics.kappa0") c.kappa0 = parse_number(field, v);
            else if (field == "physics.delta0") c.delta0 = parse_number(field, v);
            else if (field == "physics.s") c.s = parse_number(field, v);
            else if (field == "physics.p") c.p = parse_number(field, v);
            else if (field == "physics.sigma") c.sigma = static_cast<int>(parse_integer(field, v));
            else if (field == "physics.N") c.N = static_cast<int>(parse_integer(field, v));
            else if (field == "physics.M") c.M = static_cast<int>(parse_integer(field, v));
            else if (field == "data.width") c.width = parse_number(field, v);
            else if (field == "data.rotational") c.rotational = parse_bool(field, v);
            else if (field == "data.parity") c.parity = parse_bool(field, v);
            else if (field == "run.T") c.T = parse_number(field, v);
            else if (field == "run.dt") c.dt = parse_number(field, v);
            else if (field == "run.cfl") c.cfl = parse_number(field, v);
            else if (field == "run.sample_every") c.sample_every = static_cast<int>(parse_integer(field, v));
            else if (field == "run.refine") c.refine = parse_bool(field, v);
            else if (field == "scan.samples") c.samples = static_cast<int>(parse_integer(field, v));
            else if (field == "scan.t_min") c.t_min = parse_number(field, v);
            else if (field == "scan.t_max") c.t_max = parse_number(field, v);
            else if (field == "scan.t_count") c.t_count = static_cast<int>(parse_integer(field, v));
            else if (field == "scan.x_samples") c.x_samples = static_cast<int>(parse_integer(field, v));
            else if (field == "scan.n0") c.n0 = static_cast<int>(parse_integer(field, v));
            else if (field == "scan.levels") c.levels = static_cast<int>(parse_integer(field, v));
            else if (field == "scan.deriv_n0") c.deriv_n0 = static_cast<int>(parse_integer(field, v));
            else if (field == "scan.deriv_levels") c.deriv_levels = static_cast<int>(parse_integer(field, v));
            else if (field == "sweep.axis") c.sweep_axis = v;
            else if (field == "sweep.values") c.sweep_values = parse_list(field, v);
            else throw ConfigError(field, "unknown key");
        }
    }
    if (!seen.count("experiment.kind")) throw ConfigError("experiment.kind", "missing");
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config", "cannot read " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

std::string to_ini(const ExperimentConfig& c) {
    std::ostringstream os;
    auto b = [](bool x) { return x ? "true" : "false"; };
    os << "[experiment]\n"
       << "kind = " << to_string(c.kind) << "\n"
       << "seed = " << c.seed << "\n";
    if (!c.output.empty()) os << "output = " << c.output << "\n";
    os << "theorem_mode = " << b(c.theorem_mode) << "\n\n"
       << "[grid]\n"
       << "dim = " << c.dim << "\nn = " << c.n << "\nbox_length = " << fmt(c.box_length) << "\n\n"
       << "[physics]\n"
       << "variant = " << to_string(c.variant) << "\n"
       << "epsilon = " << join(c.epsilons) << "\n"
       << "kappa0 = " << fmt(c.kappa0) << "\ndelta0 = " << fmt(c.delta0) << "\n"
       << "s = " << fmt(c.s) << "\np = " << fmt(c.p) << "\n"
       << "sigma = " << c.sigma << "\nN = " << c.N << "\nM = " << c.M << "\n\n"
       << "[data]\n"
       << "width = " << fmt(c.width) << "\nrotational = " << b(c.rotational) << "\nparity = " << b(c.parity)
       << "\n\n"
       << "[run]\n"
       << "T = " << fmt(c.T) << "\ndt = " << fmt(c.dt) << "\ncfl = " << fmt(c.cfl) << "\n"
       << "sample_every = " << c.sample_every << "\nrefine = " << b(c.refine) << "\n\n"
       << "[scan]\n"
       << "samples = " << c.samples << "\nt_min = " << fmt(c.t_min) << "\nt_max = " << fmt(c.t_max) << "\n"
       << "t_count = " << c.t_count << "\nx_samples = " << c.x_samples << "\n"
       << "n0 = " << c.n0 << "\nlevels = " << c.levels << "\n"
       << "deriv_n0 = " << c.deriv_n0 << "\nderiv_levels = " << c.deriv_levels << "\n";
    if (!c.tolerances.empty()) {
        os << "\n[tolerance]\n";
        for (const auto& [k, v] : c.tolerances) os << k << " = " << fmt(v) << "\n";
    }
    if (!c.sweep_axis.empty() || !c.sweep_values.empty()) {
        os << "\n[sweep]\n";
        if (!c.sweep_axis.empty()) os << "axis = " << c.sweep_axis << "\n";
        os << "values = " << join(c.sweep_values) << "\n";
    }
    return os.str();
}

std::string config_hash(const ExperimentConfig& c) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (unsigned char ch : to_ini(c)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void validate(const ExperimentConfig& c) {
    using K = ExperimentKind;
    const K k = c.kind;

    require(!c.epsilons.empty(), "physics.epsilon", "needs at least one value");
    for (double e : c.epsilons)
        require(std::isfinite(e) && e > 0 && e <= 1, "physics.epsilon", "each value must lie in (0, 1], got " + fmt(e));
    require(finite_pos(c.kappa0) && c.kappa0 <= 0.25, "physics.kappa0", "must lie in (0, 1/4]");
    require(finite_pos(c.delta0), "physics.delta0", "must be positive");
    require(c.s > 0 && c.s < 0.5, "physics.s", "must lie in (0, 1/2)");
    require(std::isfinite(c.p) && c.p > 2, "physics.p", "must exceed 2");
    require(c.sigma >= 0 && c.N >= 0, "physics.N", "sigma and N must be non-negative");
    require(c.M >= 1, "physics.M", "must be at least 1");
    if (c.theorem_mode) {
        require(c.sigma >= 5, "physics.sigma", "theorem mode needs sigma >= 5");
        require(c.N >= c.sigma + 7, "physics.N",
                "theorem mode needs N >= sigma + 7 (global existence hypothesis), got N = " + std::to_string(c.N) +
                    ", sigma = " + std::to_string(c.sigma));
    }
    for (const auto& [key, v] : c.tolerances) {
        if (!std::isfinite(v) || v <= 0) throw ConfigError("tolerance." + key, "must be positive");
    }

    if (k == K::splitting_run || k == K::energy_campaign) {
        require(c.dim == 2 || c.dim == 3, "grid.dim", "must be 2 or 3");
        require(c.n >= 8 && c.n % 2 == 0, "grid.n", "must be even and at least 8");
        require(finite_pos(c.box_length), "grid.box_length", "must be positive");
        require(finite_pos(c.width), "data.width", "must be positive");
        require(finite_pos(c.T), "run.T", "must be positive");
        require(finite_pos(c.dt) && c.dt <= c.T, "run.dt", "must lie in (0, T]");
        require(finite_pos(c.cfl), "run.cfl", "must be positive");
        require(c.sample_every >= 1, "run.sample_every", "must be at least 1");
        if (k == K::energy_campaign)
            require(c.parity, "data.parity", "energy campaigns need parity data (mean-zero velocities)");
    }
    if (k == K::semigroup_verify) require(c.samples >= 100, "scan.samples", "must be at least 100");
    if (k == K::dispersive_scan || k == K::ion_suite) {
        if (k == K::dispersive_scan) require(c.dim == 2 || c.dim == 3, "grid.dim", "must be 2 or 3");
        require(finite_pos(c.t_min), "scan.t_min", "must be positive");
        require(std::isfinite(c.t_max) && c.t_max > c.t_min, "scan.t_max", "must exceed t_min");
        require(c.t_count >= 8, "scan.t_count", "the decay fit needs at least 8 times");
        require(c.x_samples >= 3, "scan.x_samples", "must be at least 3");
        require(finite_pos(c.width), "data.width", "must be positive");
    }
    if (k == K::ion_suite) require(c.variant == Variant::ion, "physics.variant", "ion-suite runs need variant = ion");
    if (k == K::dispersive_scan)
        require(c.variant == Variant::electron, "physics.variant", "use ion-suite for the ion variant");
    if (k == K::phase_scan) {
        require(c.variant == Variant::electron, "physics.variant", "phase scans cover the electron symbol");
        require(c.n0 >= 3, "scan.n0", "must be at least 3");
        require(c.levels >= 2, "scan.levels", "refinement needs at least 2 levels");
        require(c.deriv_n0 == 0 || c.deriv_n0 >= 3, "scan.deriv_n0", "0 (skip) or at least 3");
        require(c.deriv_levels >= 2, "scan.deriv_levels", "refinement needs at least 2 levels");
    }
}

}  // namespace nsplab
