// nsplab: run, sweep and plot verification campaigns.
//
// exit status: 0 pass, 1 a criterion failed (or a warning under --strict),
// 2 bad command line or config, 3 a run failed.

#include <spawn.h>
#include <sys/wait.h>
#include <fcntl.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <omp.h>
#include <CLI11.hpp>

#include "nsplab/campaign.hpp"

extern char** environ;

namespace fs = std::filesystem;
using namespace nsplab;

namespace {

enum Exit { kPass = 0, kFail = 1, kUsage = 2, kRunError = 3 };

fs::path output_root(const std::string& flag, const ExperimentConfig& c) {
    if (!flag.empty()) return flag;
    if (!c.output.empty()) return c.output;
    if (const char* env = std::getenv("NSPLAB_OUT"); env && *env) return env;
    return "nsplab_out";
}

void print_manifest(const json& m) {
    for (const auto& c : m["criteria"])
        std::printf("%s  %s  (value %.6g, threshold %.6g)\n", c["pass"].get<bool>() ? "PASS" : "FAIL",
                    c["name"].get<std::string>().c_str(), c["value"].get<double>(), c["threshold"].get<double>());
    for (const auto& w : m["warnings"]) std::printf("warning: %s\n", w.get<std::string>().c_str());
}

std::string tail(const fs::path& p, std::size_t n = 2000) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    std::string s = ss.str();
    return s.size() > n ? s.substr(s.size() - n) : s;
}

// One child process per sweep point, output captured in the point directory.
Runner process_runner(bool strict) {
    fs::path self = fs::read_symlink("/proc/self/exe");
    return [self, strict](const ExperimentConfig& c, const fs::path& dir) -> json {
        fs::create_directories(dir);
        fs::path ini = dir / "point.ini", log = dir / "run.log";
        write_atomic(ini, to_ini(c));
        std::vector<std::string> args{self.string(), "run", "--config", ini.string(), "--run-dir", dir.string()};
        if (strict) args.push_back("--strict");
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        argv.push_back(nullptr);

        posix_spawn_file_actions_t fa;
        posix_spawn_file_actions_init(&fa);
        posix_spawn_file_actions_addopen(&fa, 1, log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
        posix_spawn_file_actions_adddup2(&fa, 1, 2);
        pid_t pid;
        int rc = posix_spawn(&pid, self.c_str(), &fa, nullptr, argv.data(), environ);
        posix_spawn_file_actions_destroy(&fa);
        if (rc != 0) throw std::runtime_error("cannot spawn " + self.string());
        int status = 0;
        waitpid(pid, &status, 0);
        int code = WIFEXITED(status) ? WEXITSTATUS(status) : 128;
        if ((code != kPass && code != kFail) || !fs::exists(dir / "manifest.json"))
            throw std::runtime_error("point run exited with status " + std::to_string(code) + ":\n" + tail(log));
        std::ifstream is(dir / "manifest.json");
        return json::parse(is);
    };
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nsplab: verification campaigns for the viscous Euler-Poisson system"};
    app.require_subcommand(1);

    std::string config_path, out_dir, run_dir, manifest_path;
    int workers = 1;
    std::optional<long long> seed;
    bool strict = false;

    auto* run = app.add_subcommand("run", "run one campaign");
    run->add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "output root (default $NSPLAB_OUT)");
    run->add_option("--run-dir", run_dir, "exact run directory")->group("");
    run->add_option("--workers", workers, "threads inside the run")->check(CLI::PositiveNumber);
    run->add_option("--seed", seed, "overrides experiment.seed")->check(CLI::NonNegativeNumber);
    run->add_flag("--strict", strict, "warnings fail the run");

    auto* sweep = app.add_subcommand("sweep", "run one campaign per axis value");
    sweep->add_option("--config", config_path, "config file with a [sweep] section")->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", out_dir, "output root (default $NSPLAB_OUT)");
    sweep->add_option("--workers", workers, "concurrent point runs")->check(CLI::PositiveNumber);
    sweep->add_option("--seed", seed, "overrides experiment.seed")->check(CLI::NonNegativeNumber);
    sweep->add_flag("--strict", strict, "warnings fail the points");

    auto* plots = app.add_subcommand("emit-plots", "gnuplot data and scripts from a run manifest");
    plots->add_option("manifest", manifest_path, "manifest.json of a run")->required()->check(CLI::ExistingFile);
    plots->add_option("--out", out_dir, "plot directory (default <run>/plots)");
    plots->add_flag("--strict", strict, "warnings fail");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kPass : kUsage;
    }

    if (*plots) {
        try {
            fs::path mp = manifest_path;
            auto res = emit_plots(mp, out_dir.empty() ? mp.parent_path() / "plots" : fs::path(out_dir));
            for (const auto& f : res.files) std::printf("wrote %s\n", f.string().c_str());
            for (const auto& w : res.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
            return strict && !res.warnings.empty() ? kFail : kPass;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return kRunError;
        }
    }

    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
        if (seed) cfg.seed = static_cast<std::uint64_t>(*seed);
        if (*run) validate(cfg);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kUsage;
    }

    try {
        if (*run) {
            omp_set_num_threads(workers);
            fs::path dir = run_dir.empty() ? run_directory(cfg, output_root(out_dir, cfg)) : fs::path(run_dir);
            auto res = run_experiment(cfg, dir, strict);
            print_manifest(res.manifest);
            std::printf("%s %s %s\n", res.pass ? "PASS" : "FAIL", to_string(cfg.kind), dir.string().c_str());
            return res.pass ? kPass : kFail;
        }
        fs::path dir = output_root(out_dir, cfg) /
                       ("sweep-" + cfg.sweep_axis + "-" + std::string(to_string(cfg.kind)) + "-" +
                        config_hash(cfg).substr(0, 12));
        auto res = run_sweep(cfg, dir, workers, process_runner(strict));
        for (const auto& p : res.report["points"]) {
            std::printf("%s  %s = %.6g  %s%s\n", p["pass"].get<bool>() ? "PASS" : "FAIL", cfg.sweep_axis.c_str(),
                        p["value"].get<double>(), p["dir"].get<std::string>().c_str(),
                        p.value("reused", false) ? " (reused)" : "");
            if (p.contains("error")) std::printf("  error: %s\n", p["error"].get<std::string>().c_str());
        }
        for (const auto& [k, u] : res.report["uniformity"].items())
            std::printf("  %-28s min %.6g  max %.6g  spread %.3g\n", k.c_str(), u["min"].get<double>(),
                        u["max"].get<double>(), u["spread"].get<double>());
        std::printf("%s sweep %s\n", res.pass ? "PASS" : "FAIL", dir.string().c_str());
        bool crashed = false;
        for (const auto& p : res.report["points"]) crashed = crashed || p.contains("error");
        return crashed ? kRunError : (res.pass ? kPass : kFail);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "run error: %s\n", e.what());
        return kRunError;
    }
}
