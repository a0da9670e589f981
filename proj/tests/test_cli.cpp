#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nsplab/campaign.hpp"

using namespace nsplab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("nsplab_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

const char* kSplit = R"(
[experiment]
kind = splitting-run
seed = 3
[grid]
dim = 2
n = 16
box_length = 2pi
[physics]
epsilon = 0.2
[run]
T = 0.2
dt = 0.02
sample_every = 2
)";

ExperimentConfig small_semigroup() {
    return parse_config("[experiment]\nkind = semigroup-verify\n[scan]\nsamples = 500\n");
}

template <class F>
std::string field_of(F&& f) {
    try {
        f();
    } catch (const ConfigError& e) {
        return e.field;
    }
    return "<no error>";
}

}  // namespace

TEST(Config, CanonicalTextRoundTrips) {
    auto c = parse_config(kSplit);
    EXPECT_EQ(c.kind, ExperimentKind::splitting_run);
    EXPECT_DOUBLE_EQ(c.box_length, 2 * kPi);
    EXPECT_EQ(c.epsilons, std::vector<double>{0.2});
    c.tolerances["splitting"] = 1e-7;
    auto again = parse_config(to_ini(c));
    EXPECT_EQ(to_ini(again), to_ini(c));
    EXPECT_EQ(config_hash(again), config_hash(c));
    EXPECT_EQ(config_hash(c).size(), 16u);
    auto other = c;
    other.seed = 4;
    EXPECT_NE(config_hash(other), config_hash(c));
    EXPECT_DOUBLE_EQ(c.tol("splitting"), 1e-7);
    EXPECT_DOUBLE_EQ(c.tol("curl"), 1e-8);
}

TEST(Config, ValidationNamesTheField) {
    auto c = parse_config(kSplit);
    c.theorem_mode = true;
    c.sigma = 5;
    c.N = 11;
    try {
        validate(c);
        FAIL() << "N = 11 < sigma + 7 accepted";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field, "physics.N");
        EXPECT_NE(std::string(e.what()).find("sigma + 7"), std::string::npos);
    }
    c.N = 12;
    EXPECT_NO_THROW(validate(c));
    c.theorem_mode = false;
    c.N = 3;
    EXPECT_NO_THROW(validate(c));

    EXPECT_EQ(field_of([] { parse_config("[experiment]\nkind = splitting-run\n[grid]\nnn = 3\n"); }), "grid.nn");
    EXPECT_EQ(field_of([] { parse_config("[experiment]\nkind = nothing\n"); }), "experiment.kind");
    EXPECT_EQ(field_of([] { parse_config("[grid]\nn = 16\n"); }), "experiment.kind");
    EXPECT_EQ(field_of([] { parse_config("[experiment]\nkind = phase-scan\n[physics]\nkappa0 = abc\n"); }),
              "physics.kappa0");
    EXPECT_EQ(field_of([] { parse_config("[experiment]\nkind = phase-scan\n[tolerance]\nwhatever = 1\n"); }),
              "tolerance.whatever");
    EXPECT_EQ(field_of([] { validate(parse_config("[experiment]\nkind = phase-scan\n[physics]\nepsilon = 2\n")); }),
              "physics.epsilon");
    EXPECT_EQ(field_of([] { validate(parse_config("[experiment]\nkind = ion-suite\n")); }), "physics.variant");
    EXPECT_EQ(field_of([&] {
                  auto d = parse_config(kSplit);
                  d.dt = 1.0;
                  validate(d);
              }),
              "run.dt");
}

TEST(Sweep, EmptyAxisAndBadPointsStopBeforeLaunch) {
    auto c = small_semigroup();
    c.sweep_axis = "epsilon";
    EXPECT_EQ(field_of([&] { expand_sweep(c); }), "sweep.values");
    c.sweep_axis.clear();
    c.sweep_values = {0.1};
    EXPECT_EQ(field_of([&] { expand_sweep(c); }), "sweep.axis");

    std::atomic<int> calls{0};
    Runner counting = [&](const ExperimentConfig&, const fs::path&) {
        ++calls;
        return json::object();
    };
    c.sweep_axis = "epsilon";
    c.sweep_values = {0.1, 5.0};  // the second point is invalid
    auto dir = scratch("badsweep");
    EXPECT_THROW(run_sweep(c, dir, 2, counting), ConfigError);
    EXPECT_EQ(calls.load(), 0);
    fs::remove_all(dir);
}

TEST(Sweep, UniformityReportAndRestart) {
    auto c = small_semigroup();
    c.sweep_axis = "epsilon";
    c.sweep_values = {1e-3, 1e-2, 1e-1, 1.0};
    auto dir = scratch("sweep");
    std::atomic<int> calls{0};
    auto inner = in_process_runner();
    Runner counting = [&](const ExperimentConfig& p, const fs::path& d) {
        ++calls;
        return inner(p, d);
    };
    auto res = run_sweep(c, dir, 3, counting);
    EXPECT_TRUE(res.pass);
    EXPECT_EQ(calls.load(), 4);
    ASSERT_TRUE(res.report["uniformity"].contains("damping_sup"));
    auto u = res.report["uniformity"]["damping_sup"];
    EXPECT_LE(u["min"].get<double>(), u["max"].get<double>());
    EXPECT_EQ(u["values"].size(), 4u);
    EXPECT_TRUE(fs::exists(dir / "manifest.json"));
    EXPECT_TRUE(fs::exists(dir / "point-3" / "manifest.json"));

    // a rerun picks up the finished points
    auto again = run_sweep(c, dir, 2, counting);
    EXPECT_EQ(calls.load(), 4);
    EXPECT_TRUE(again.report["points"][0]["reused"].get<bool>());
    fs::remove_all(dir);
}

TEST(Run, ManifestAndReproducibleCsv) {
    auto c = parse_config(kSplit);
    auto root = scratch("run");
    auto a = run_experiment(c, root / "a");
    auto b = run_experiment(c, root / "b");
    EXPECT_TRUE(a.pass);
    const auto& m = a.manifest;
    EXPECT_EQ(m["schema"], "nsplab.manifest");
    EXPECT_EQ(m["config_hash"], config_hash(c));
    EXPECT_EQ(m["code_version"], kCodeVersion);
    EXPECT_EQ(m["chi_profile_hash"], profile_hash());
    EXPECT_GE(m["wall_time_s"].get<double>(), 0.0);
    bool all = true;
    for (const auto& cr : m["criteria"]) all = all && cr["pass"].get<bool>();
    EXPECT_EQ(all, m["pass"].get<bool>());
    for (const auto& f : m["outputs"]) {
        std::string name = f;
        ASSERT_TRUE(fs::exists(root / "a" / name)) << name;
        if (name.ends_with(".csv") || name.ends_with(".ckpt") || name == "summary.json")
            EXPECT_EQ(slurp(root / "a" / name), slurp(root / "b" / name)) << name;
    }
    EXPECT_EQ(slurp(root / "a" / "config.ini"), to_ini(c));
    auto summary = json::parse(slurp(root / "a" / "summary.json"));
    EXPECT_EQ(summary["schema"], "nsplab.splitting-run");
    EXPECT_EQ(summary["schema_version"], kSchemaVersion);
    EXPECT_FALSE(fs::exists(root / "a" / "manifest.json.tmp"));
    fs::remove_all(root);
}

TEST(Run, StrictTurnsWarningsIntoFailure) {
    auto c = parse_config(kSplit);
    c.n = 8;
    c.T = 3.5;  // past L/2
    c.dt = 0.05;
    c.sample_every = 10;
    auto root = scratch("strict");
    auto lax = run_experiment(c, root / "lax", false);
    auto strict = run_experiment(c, root / "strict", true);
    EXPECT_FALSE(lax.manifest["warnings"].empty());
    EXPECT_TRUE(lax.pass);
    EXPECT_TRUE(strict.manifest["criteria_pass"].get<bool>());
    EXPECT_FALSE(strict.pass);
    fs::remove_all(root);
}

TEST(Plots, DecayAndEnergyColumns) {
    auto dir = scratch("plots");
    spit(dir / "decay.csv", "t,value\n1,1\n2,0.35\n4,0.125\n");
    spit(dir / "energy.csv", "t,EN,dissipation,extra\n0,1,0.1,9\n1,0.9,0.08,9\n");
    json m = versioned("manifest");
    m["series"] = json::array({{{"name", "decay"}, {"file", "decay.csv"}, {"x", "t"}, {"y", {"value"}},
                                {"predicted_exponent", 1.5}, {"anchor", 1.0}},
                               {{"name", "energy"}, {"file", "energy.csv"}, {"x", "t"}, {"y", {"EN", "dissipation"}}}});
    write_json(dir / "manifest.json", m);
    auto res = emit_plots(dir / "manifest.json", dir / "plots");
    EXPECT_TRUE(res.warnings.empty());
    EXPECT_EQ(res.files.size(), 4u);

    std::istringstream decay(slurp(dir / "plots" / "decay.dat"));
    std::string line;
    std::getline(decay, line);
    EXPECT_EQ(line, "# t value predicted");
    double t, v, p;
    decay >> t >> v >> p;
    EXPECT_DOUBLE_EQ(p, 1.0);
    decay >> t >> v >> p;
    decay >> t >> v >> p;
    EXPECT_DOUBLE_EQ(t, 4.0);
    EXPECT_NEAR(p, 0.125, 1e-15);  // 4^{-3/2}
    EXPECT_NE(slurp(dir / "plots" / "decay.gp").find("logscale"), std::string::npos);

    std::istringstream energy(slurp(dir / "plots" / "energy.dat"));
    std::getline(energy, line);
    EXPECT_EQ(line, "# t EN dissipation");
    std::getline(energy, line);
    EXPECT_EQ(line, "0 1 0.10000000000000001");

    json empty = versioned("manifest");
    write_json(dir / "empty.json", empty);
    auto none = emit_plots(dir / "empty.json", dir / "none");
    EXPECT_EQ(none.warnings.size(), 1u);
    EXPECT_TRUE(none.files.empty());

    m["series"][0]["file"] = "gone.csv";
    write_json(dir / "manifest.json", m);
    EXPECT_THROW(emit_plots(dir / "manifest.json", dir / "plots"), std::runtime_error);
    fs::remove_all(dir);
}

class Binary : public ::testing::Test {
protected:
    void SetUp() override {
        const char* b = std::getenv("NSPLAB_CLI");
        if (!b) GTEST_SKIP() << "NSPLAB_CLI not set";
        bin = b;
        dir = scratch("cli");
    }
    void TearDown() override {
        if (!dir.empty()) fs::remove_all(dir);
    }
    int sh(const std::string& args, const std::string& env = "") {
        std::string cmd = env + " '" + bin + "' " + args + " > '" + (dir / "out.txt").string() + "' 2>&1";
        int rc = std::system(cmd.c_str());
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    }
    std::string bin;
    fs::path dir;
};

TEST_F(Binary, RunUsesEnvRootAndSeedOverride) {
    spit(dir / "sg.ini", "[experiment]\nkind = semigroup-verify\nseed = 1\n[scan]\nsamples = 300\n");
    ASSERT_EQ(sh("run --config '" + (dir / "sg.ini").string() + "'", "NSPLAB_OUT='" + (dir / "root").string() + "'"), 0)
        << slurp(dir / "out.txt");
    auto c = load_config(dir / "sg.ini");
    EXPECT_TRUE(fs::exists(run_directory(c, dir / "root") / "manifest.json"));

    ASSERT_EQ(sh("run --seed 9 --config '" + (dir / "sg.ini").string() + "' --out '" + (dir / "flag").string() + "'"), 0);
    c.seed = 9;
    EXPECT_TRUE(fs::exists(run_directory(c, dir / "flag") / "manifest.json"));
    EXPECT_NE(slurp(dir / "out.txt").find("PASS"), std::string::npos);
}

TEST_F(Binary, ExitStatusForBadInput) {
    spit(dir / "bad.ini", "[experiment]\nkind = energy-campaign\ntheorem_mode = true\n[physics]\nsigma = 5\nN = 10\n");
    EXPECT_EQ(sh("run --config '" + (dir / "bad.ini").string() + "'"), 2);
    EXPECT_NE(slurp(dir / "out.txt").find("physics.N"), std::string::npos);
    EXPECT_EQ(sh("run"), 2);
    EXPECT_EQ(sh("frobnicate"), 2);

    spit(dir / "sw.ini", "[experiment]\nkind = semigroup-verify\n[sweep]\naxis = epsilon\nvalues =\n");
    EXPECT_EQ(sh("sweep --config '" + (dir / "sw.ini").string() + "' --out '" + dir.string() + "'"), 2);
    EXPECT_NE(slurp(dir / "out.txt").find("sweep.values"), std::string::npos);

    write_json(dir / "empty.json", versioned("manifest"));
    EXPECT_EQ(sh("emit-plots '" + (dir / "empty.json").string() + "'"), 0);
    EXPECT_NE(slurp(dir / "out.txt").find("warning"), std::string::npos);
    EXPECT_EQ(sh("emit-plots --strict '" + (dir / "empty.json").string() + "'"), 1);
}

TEST_F(Binary, SweepRunsOneProcessPerPoint) {
    spit(dir / "sw.ini",
         "[experiment]\nkind = semigroup-verify\n[scan]\nsamples = 300\n[sweep]\naxis = epsilon\nvalues = 0.01, 1\n");
    ASSERT_EQ(sh("sweep --workers 2 --config '" + (dir / "sw.ini").string() + "' --out '" + dir.string() + "'"), 0)
        << slurp(dir / "out.txt");
    fs::path sweep_dir;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().filename().string().starts_with("sweep-")) sweep_dir = e.path();
    ASSERT_FALSE(sweep_dir.empty());
    EXPECT_TRUE(fs::exists(sweep_dir / "point-0" / "run.log"));
    EXPECT_TRUE(fs::exists(sweep_dir / "point-1" / "manifest.json"));
    auto m = json::parse(slurp(sweep_dir / "manifest.json"));
    EXPECT_EQ(m["schema"], "nsplab.sweep");
    EXPECT_TRUE(m["pass"].get<bool>());
}
