#pragma once
// Campaign orchestration: one config in, CSV/JSON artifacts and a manifest out.

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "nsplab/config.hpp"
#include "nsplab/report.hpp"

namespace nsplab {

struct Criterion {
    std::string name;
    bool pass = false;
    double value = 0, threshold = 0;
    std::string detail;
};

// A plottable series stored in one of the run's CSV files.
struct SeriesSpec {
    std::string name;
    std::string file;  // relative to the run directory
    std::string x;
    std::vector<std::string> y;
    double predicted_exponent = 0;  // guide line ~ x^{-p} through the first point at x >= anchor; 0: none
    double anchor = 0;
};

struct CampaignResult {
    json summary;
    std::map<std::string, CsvTable> tables;      // file name -> table
    std::map<std::string, std::string> blobs;    // file name -> raw bytes (checkpoints)
    std::vector<Criterion> criteria;
    std::vector<SeriesSpec> series;
    std::map<std::string, double> constants;     // fitted constants, compared across sweeps
    std::vector<std::string> warnings;
};

// Validates, then runs the campaign in memory. Numerical failures propagate
// as std::runtime_error with the campaign and epsilon in the message.
CampaignResult run_campaign(const ExperimentConfig& c);

// <root>/<kind>-<first 12 hash digits>
std::filesystem::path run_directory(const ExperimentConfig& c, const std::filesystem::path& root);

struct RunOutcome {
    std::filesystem::path dir;
    json manifest;
    bool pass = false;
};

// Runs and writes config.ini, the tables, summary.json and finally manifest.json.
// With strict set, any warning fails the run.
RunOutcome run_experiment(const ExperimentConfig& c, const std::filesystem::path& dir, bool strict = false);

// Expands the sweep section into one config per axis value; every config is
// validated before this returns.
std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& tmpl);

// Produces the manifest of one sweep point in dir.
using Runner = std::function<json(const ExperimentConfig&, const std::filesystem::path& dir)>;
Runner in_process_runner(bool strict = false);

struct SweepOutcome {
    std::filesystem::path dir;
    json report;
    bool pass = false;
};

// Points run in <dir>/point-<i> on at most `workers` threads. A point whose
// manifest already matches its config hash is reused, so an interrupted sweep
// can simply be rerun.
SweepOutcome run_sweep(const ExperimentConfig& tmpl, const std::filesystem::path& dir, int workers,
                       const Runner& runner);

struct PlotOutcome {
    std::vector<std::filesystem::path> files;
    std::vector<std::string> warnings;
};

// Whitespace-delimited .dat files and a gnuplot script per series.
PlotOutcome emit_plots(const std::filesystem::path& manifest, const std::filesystem::path& out_dir);

}  // namespace nsplab
