#pragma once
// Experiment configuration: sectioned key = value text, validated up front.

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsplab/semigroup.hpp"

namespace nsplab {

enum class ExperimentKind { semigroup_verify, dispersive_scan, phase_scan, splitting_run, energy_campaign, ion_suite };

const char* to_string(ExperimentKind k);
ExperimentKind kind_from_string(const std::string& s);

enum class SweepAxis { epsilon, kappa0, grid };

const char* to_string(SweepAxis a);
SweepAxis axis_from_string(const std::string& s);

// Thrown for a bad field; field is "section.key".
struct ConfigError : std::invalid_argument {
    std::string field;
    ConfigError(std::string f, const std::string& reason);
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::semigroup_verify;
    std::uint64_t seed = 1;
    std::string output;        // output root; empty means the caller decides
    bool theorem_mode = false;  // enforce the regularity hypotheses of the global theory

    int dim = 2;
    int n = 32;
    double box_length = 2 * kPi;

    Variant variant = Variant::electron;
    std::vector<double> epsilons{0.1};
    double kappa0 = 1.0 / 200;
    double delta0 = 0.01;
    double s = 0.4;  // negative Sobolev index
    double p = 8;    // Lebesgue exponent of the dispersive weight
    int sigma = 5, N = 3, M = 3;

    double width = 1.5;  // spectral width of the initial data
    bool rotational = true;
    bool parity = true;

    double T = 1, dt = 0.01, cfl = 1.0;
    int sample_every = 1;
    bool refine = true;  // repeat energy runs at dt/2

    int samples = 10000;  // green-matrix oracle samples
    double t_min = 10, t_max = 200;
    int t_count = 12;
    int x_samples = 241;
    int n0 = 21, levels = 2;
    int deriv_n0 = 0, deriv_levels = 2;  // deriv_n0 = 0 skips the derivative scan

    std::map<std::string, double> tolerances;

    // sweep template part; unused by run
    std::string sweep_axis;
    std::vector<double> sweep_values;

    double tol(const std::string& key) const;  // override or built-in default
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical text: every field, fixed order, %.17g. parse_config(to_ini(c)) == c.
std::string to_ini(const ExperimentConfig& c);
std::string config_hash(const ExperimentConfig& c);  // 16 hex digits over to_ini

// Throws ConfigError naming the first offending field.
void validate(const ExperimentConfig& c);

const std::map<std::string, double>& default_tolerances();

}  // namespace nsplab
