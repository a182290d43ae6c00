#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qdistill/experiment.hpp"

#include <filesystem>
#include <fstream>

using namespace qdistill;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

struct TempDir {
    fs::path path;
    TempDir(const char* name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

ExperimentConfig tiny_distill() {
    ExperimentConfig cfg;
    cfg.name = "tiny";
    cfg.mode = Mode::distill;
    cfg.model = ModelSpec{ModelSpec::Kind::bose_hubbard, 3, 1, 1.0, 1.0, 1};
    cfg.beta = 1.0;
    cfg.greedy.dt = 0.2;
    cfg.greedy.steps = 40;
    return cfg;
}

}  // namespace

TEST_CASE("preset catalogue honours its naming contract") {
    const auto names = list_presets();
    auto has = [&](const char* n) {
        return std::find(names.begin(), names.end(), n) != names.end();
    };
    CHECK(has("table1_2_4"));
    CHECK(has("table1_1_3"));
    CHECK(has("fig2a"));
    CHECK(has("fig2e"));
    CHECK(has("fig3c"));
    CHECK(has("ising_table_s2_6"));
    CHECK(has("timekeeping_bh"));
    CHECK(has("timekeeping_ising"));
    CHECK(has("purity_fig2a"));

    const Preset* fig3a = find_preset("fig3a");
    REQUIRE(fig3a != nullptr);
    CHECK(fig3a->config.model.sites == 5);
    CHECK(fig3a->config.model.particles == 2);
    CHECK(fig3a->config.model.l_A == 2);
    CHECK(fig3a->config.beta == 2.0);
    CHECK(fig3a->config.greedy.dt == 0.6);

    const Preset* fig3b = find_preset("fig3b");
    REQUIRE(fig3b != nullptr);
    CHECK(fig3b->config.model.sites == 6);
    CHECK(fig3b->config.model.particles == 3);
    CHECK(fig3b->config.greedy.dt == 0.5);

    CHECK(find_preset("does-not-exist") == nullptr);
    for (const auto& preset : presets()) CHECK(preset.runtime_budget_seconds > 0.0);
}

TEST_CASE("distill run emits the series CSV and summary with the fixed contract") {
    TempDir dir("qdistill_test_distill");
    RunOptions opts;
    opts.out_dir = dir.path.string();
    const auto result = run(tiny_distill(), opts);
    REQUIRE(result.files.size() == 2);

    const std::string csv = read_file(dir.path / "tiny.csv");
    CHECK(csv.rfind("t,S_B,S_A,S_AB,I_AB,P_B,n_B,gamma\n", 0) == 0);
    const std::size_t rows = std::count(csv.begin(), csv.end(), '\n');
    CHECK(rows == 42);  // header + steps + 1

    const std::string summary = read_file(dir.path / "tiny_summary.txt");
    for (const char* field : {"final_entropy = ", "bound = ", "difference = ", "final_n_B = ",
                              "total_time_steps = ", "delta_t = ", "objective = ", "log_base = ",
                              "wall_seconds = "})
        CHECK(summary.find(field) != std::string::npos);
    CHECK(summary.find("objective = entropy") != std::string::npos);
    CHECK(summary.find("log_base = nat") != std::string::npos);
    CHECK(summary.find("total_time_steps = 40") != std::string::npos);
}

TEST_CASE("bound mode reports the single-site equality") {
    TempDir dir("qdistill_test_bound");
    ExperimentConfig cfg;
    cfg.name = "bnd";
    cfg.mode = Mode::bound;
    cfg.model = ModelSpec{ModelSpec::Kind::bose_hubbard, 4, 2, 1.0, 1.0, 1};
    cfg.beta = 1.0;
    RunOptions opts;
    opts.out_dir = dir.path.string();
    const auto result = run(cfg, opts);
    // frozen spectral value of the total entropy; l_A = 1 makes it the bound
    CHECK(result.bound == doctest::Approx(1.229558893475110).epsilon(1e-10));
    const std::string summary = read_file(dir.path / "bnd_summary.txt");
    CHECK(summary.find("bound = 1.22955889348") != std::string::npos);
}

TEST_CASE("reruns are byte-identical") {
    TempDir dir_a("qdistill_test_det_a");
    TempDir dir_b("qdistill_test_det_b");
    ExperimentConfig cfg = tiny_distill();
    cfg.greedy.rng_seed = 9;
    RunOptions opts_a, opts_b;
    opts_a.out_dir = dir_a.path.string();
    opts_b.out_dir = dir_b.path.string();
    run(cfg, opts_a);
    run(cfg, opts_b);
    CHECK(read_file(dir_a.path / "tiny.csv") == read_file(dir_b.path / "tiny.csv"));

    cfg.mode = Mode::random_dt;
    cfg.greedy.dt_sigma = 0.05;
    run(cfg, opts_a);
    run(cfg, opts_b);
    CHECK(read_file(dir_a.path / "tiny.csv") == read_file(dir_b.path / "tiny.csv"));
}

TEST_CASE("sweep mode writes one row per grid point and parallelizes safely") {
    TempDir dir("qdistill_test_sweep");
    ExperimentConfig cfg = tiny_distill();
    cfg.name = "sw";
    cfg.mode = Mode::sweep;
    cfg.sweep_axis = SweepAxis::beta;
    cfg.sweep_grid = {0.5, 1.0, 2.0, 4.0};
    RunOptions serial, parallel;
    serial.out_dir = (dir.path / "serial").string();
    parallel.out_dir = (dir.path / "parallel").string();
    parallel.threads = 2;
    run(cfg, serial);
    run(cfg, parallel);
    const std::string a = read_file(fs::path(serial.out_dir) / "sw_sweep.csv");
    const std::string b = read_file(fs::path(parallel.out_dir) / "sw_sweep.csv");
    CHECK(a == b);
    CHECK(a.rfind("beta,final_entropy,initial_entropy,bound,difference,final_n_B,initial_n_B\n",
                  0) == 0);
    CHECK(std::count(a.begin(), a.end(), '\n') == 5);
}

TEST_CASE("replay mode emits the replayed trajectory") {
    TempDir dir("qdistill_test_replay");
    ExperimentConfig cfg = tiny_distill();
    cfg.name = "rp";
    cfg.mode = Mode::replay;
    cfg.replay_beta = 5.0;
    RunOptions opts;
    opts.out_dir = dir.path.string();
    const auto result = run(cfg, opts);
    CHECK(fs::exists(dir.path / "rp.csv"));
    CHECK(result.final_entropy >= result.bound - 1e-9);
}

TEST_CASE("timekeeping mode writes the sigma table") {
    TempDir dir("qdistill_test_tk");
    ExperimentConfig cfg = tiny_distill();
    cfg.name = "tk";
    cfg.mode = Mode::timekeeping;
    cfg.greedy.steps = 20;
    cfg.sigma_grid = {0.0, 0.1};
    cfg.quadrature_points = 31;
    RunOptions opts;
    opts.out_dir = dir.path.string();
    run(cfg, opts);
    const std::string csv = read_file(dir.path / "tk_timekeeping.csv");
    CHECK(csv.rfind("sigma,relative_error,final_entropy\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(csv.find("\n0,0,") != std::string::npos);
}

TEST_CASE("config parsing") {
    SUBCASE("a full document round-trips") {
        const char* text = R"({
            "name": "demo",
            "mode": "distill",
            "model": {"kind": "bose_hubbard", "L": 4, "N": 2, "J": 1.0, "U": 1.0, "l_A": 1},
            "beta": 1.5,
            "control_set": [1.0, 0.5, 0.0],
            "delta_t": 0.25,
            "steps": 12,
            "objective": "purity",
            "tie_epsilon": 1e-10,
            "log_base": "2",
            "seed": 77
        })";
        const auto cfg = parse_config(text);
        CHECK(cfg.name == "demo");
        CHECK(cfg.model.sites == 4);
        CHECK(cfg.beta == 1.5);
        CHECK(cfg.control_set.values == std::vector<double>{1.0, 0.5, 0.0});
        CHECK(cfg.greedy.dt == 0.25);
        CHECK(cfg.greedy.steps == 12);
        CHECK(cfg.greedy.objective == Objective::purity);
        CHECK(cfg.greedy.base == LogBase::two);
        CHECK(cfg.greedy.rng_seed == 77);
    }
    SUBCASE("syntax errors carry line numbers") {
        const char* bad = "{\n  \"mode\": \"distill\",\n  \"model\": {\n";
        try {
            parse_config(bad);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("line") != std::string::npos);
        }
    }
    SUBCASE("unknown keys and values are named") {
        CHECK_THROWS_WITH_AS(
            parse_config(R"({"mode": "distill", "model": {"kind": "bose_hubbard", "L": 3, "N": 1, "l_A": 1}, "typo_key": 1})"),
            doctest::Contains("typo_key"), ConfigError);
        CHECK_THROWS_WITH_AS(parse_config(R"({"mode": "warp", "model": {"L": 3, "N": 1, "l_A": 1}})"),
                             doctest::Contains("warp"), ConfigError);
        CHECK_THROWS_AS(parse_config(R"({"mode": "sweep", "model": {"L": 3, "N": 1, "l_A": 1}})"),
                        ConfigError);
    }
    SUBCASE("model validation still applies") {
        CHECK_THROWS_AS(parse_config(R"({"mode": "distill", "model": {"kind": "bose_hubbard", "L": 3, "N": 1, "l_A": 5}})"),
                        ConfigError);
    }
}

TEST_CASE("number formatting is 12 significant digits") {
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(1.0 / 3.0) == "0.333333333333");
    CHECK(format_number(1.229558893475110) == "1.22955889348");
}
