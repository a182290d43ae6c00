#pragma once

#include "qdistill/greedy.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace qdistill {

enum class Mode { distill, bound, replay, sweep, timekeeping, random_dt };
enum class SweepAxis { beta, hopping, onsite };

struct ExperimentConfig {
    std::string name = "run";
    Mode mode = Mode::distill;
    ModelSpec model;
    double beta = 1.0;
    ControlSet control_set = default_control_set();
    GreedyConfig greedy;
    double replay_beta = 0.0;  // replay mode: temperature the recorded path is tested on
    SweepAxis sweep_axis = SweepAxis::beta;
    std::vector<double> sweep_grid;
    std::vector<double> sigma_grid;
    int quadrature_points = 51;

    void validate() const {
        model.validate();
        control_set.validate();
        greedy.validate();
        if (!(beta >= 0.0) || !std::isfinite(beta))
            throw std::invalid_argument("config: beta must be finite and >= 0");
        if (mode == Mode::replay && (!(replay_beta >= 0.0) || !std::isfinite(replay_beta)))
            throw std::invalid_argument("config: replay_beta must be finite and >= 0");
        if (mode == Mode::sweep && sweep_grid.empty())
            throw std::invalid_argument("config: sweep mode needs a non-empty grid");
        if (mode == Mode::timekeeping && sigma_grid.empty())
            throw std::invalid_argument("config: timekeeping mode needs a non-empty sigma_grid");
    }
};

struct RunOptions {
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<LogBase> base;
    int threads = 1;
};

struct RunResult {
    std::vector<std::string> files;
    double final_entropy = 0.0;
    double bound = 0.0;
    double wall_seconds = 0.0;
};

// ---------------------------------------------------------------------------
// formatting / file output
// ---------------------------------------------------------------------------

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// write-then-rename so partially written files never appear under the final name
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("write_file_atomic: cannot open " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write_file_atomic: write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string series_csv_text(const ExperimentRecord& rec) {
    std::string text = "t,S_B,S_A,S_AB,I_AB,P_B,n_B,gamma\n";
    for (std::size_t j = 0; j < rec.t.size(); ++j) {
        text += format_number(rec.t[j]);
        text += ',';
        text += format_number(rec.entropy_B[j]);
        text += ',';
        text += format_number(rec.entropy_A[j]);
        text += ',';
        text += format_number(rec.entropy_AB[j]);
        text += ',';
        text += format_number(rec.mutual_information_AB[j]);
        text += ',';
        text += format_number(rec.purity_B[j]);
        text += ',';
        text += format_number(rec.n_B[j]);
        text += ',';
        text += format_number(rec.gamma[j]);
        text += '\n';
    }
    return text;
}

struct SummaryFields {
    double final_entropy = 0.0;
    double bound = 0.0;
    double difference = 0.0;
    double final_n_B = 0.0;
    int total_time_steps = 0;
    double delta_t = 0.0;
    Objective objective = Objective::entropy;
    LogBase log_base = LogBase::natural;
    double wall_seconds = 0.0;
};

inline std::string summary_text(const SummaryFields& s) {
    std::ostringstream out;
    out << "final_entropy = " << format_number(s.final_entropy) << '\n'
        << "bound = " << format_number(s.bound) << '\n'
        << "difference = " << format_number(s.difference) << '\n'
        << "final_n_B = " << format_number(s.final_n_B) << '\n'
        << "total_time_steps = " << s.total_time_steps << '\n'
        << "delta_t = " << format_number(s.delta_t) << '\n'
        << "objective = " << (s.objective == Objective::purity ? "purity" : "entropy") << '\n'
        << "log_base = " << (s.log_base == LogBase::two ? "2" : "nat") << '\n'
        << "wall_seconds = " << format_number(s.wall_seconds) << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// config parsing
// ---------------------------------------------------------------------------

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::pair<int, int> line_column_of_offset(const std::string& text, std::size_t offset) {
    int line = 1, column = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

inline void reject_unknown_keys(const nlohmann::json& obj, const char* where,
                                std::initializer_list<const char*> known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) ok = true;
        if (!ok)
            throw ConfigError(std::string("config: unknown key '") + it.key() + "' in " + where);
    }
}

inline Mode parse_mode(const std::string& s) {
    if (s == "distill") return Mode::distill;
    if (s == "bound") return Mode::bound;
    if (s == "replay") return Mode::replay;
    if (s == "sweep") return Mode::sweep;
    if (s == "timekeeping") return Mode::timekeeping;
    if (s == "random_dt") return Mode::random_dt;
    throw ConfigError("config: unknown mode '" + s + "'");
}

inline SweepAxis parse_axis(const std::string& s) {
    if (s == "beta") return SweepAxis::beta;
    if (s == "J") return SweepAxis::hopping;
    if (s == "U") return SweepAxis::onsite;
    throw ConfigError("config: unknown sweep axis '" + s + "' (expected beta, J or U)");
}

inline LogBase parse_base(const std::string& s) {
    if (s == "nat" || s == "e") return LogBase::natural;
    if (s == "2" || s == "two") return LogBase::two;
    throw ConfigError("config: unknown log_base '" + s + "' (expected nat or 2)");
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, column] = detail::line_column_of_offset(json_text, e.byte);
        throw ConfigError("config parse error at line " + std::to_string(line) + ", column " +
                          std::to_string(column) + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config: top level must be an object");
    detail::reject_unknown_keys(doc, "top level",
                                {"name", "mode", "model", "beta", "control_set", "delta_t", "steps",
                                 "objective", "tie_epsilon", "log_base", "seed", "delta_t_sigma",
                                 "replay_beta", "sweep", "timekeeping"});

    ExperimentConfig cfg;
    try {
        cfg.name = doc.value("name", std::string("run"));
        cfg.mode = detail::parse_mode(doc.value("mode", std::string("distill")));

        if (!doc.contains("model")) throw ConfigError("config: missing 'model' object");
        const auto& model = doc.at("model");
        detail::reject_unknown_keys(model, "model", {"kind", "L", "N", "J", "U", "l_A"});
        const std::string kind = model.value("kind", std::string("bose_hubbard"));
        if (kind == "bose_hubbard")
            cfg.model.kind = ModelSpec::Kind::bose_hubbard;
        else if (kind == "ising")
            cfg.model.kind = ModelSpec::Kind::ising;
        else
            throw ConfigError("config: unknown model kind '" + kind + "'");
        cfg.model.sites = model.value("L", 0);
        cfg.model.particles = model.value("N", 0);
        cfg.model.hopping = model.value("J", 1.0);
        cfg.model.onsite = model.value("U", 1.0);
        cfg.model.l_A = model.value("l_A", 1);

        cfg.beta = doc.value("beta", 1.0);
        if (doc.contains("control_set"))
            cfg.control_set.values = doc.at("control_set").get<std::vector<double>>();
        cfg.greedy.dt = doc.value("delta_t", 0.1);
        cfg.greedy.steps = doc.value("steps", 100);
        const std::string objective = doc.value("objective", std::string("entropy"));
        if (objective == "entropy")
            cfg.greedy.objective = Objective::entropy;
        else if (objective == "purity")
            cfg.greedy.objective = Objective::purity;
        else
            throw ConfigError("config: unknown objective '" + objective + "'");
        cfg.greedy.tie_epsilon = doc.value("tie_epsilon", 1e-12);
        cfg.greedy.base = detail::parse_base(doc.value("log_base", std::string("nat")));
        cfg.greedy.rng_seed = doc.value("seed", std::uint64_t{0});
        cfg.greedy.dt_sigma = doc.value("delta_t_sigma", 0.0);
        cfg.replay_beta = doc.value("replay_beta", 0.0);

        if (doc.contains("sweep")) {
            const auto& sweep = doc.at("sweep");
            detail::reject_unknown_keys(sweep, "sweep", {"axis", "grid"});
            cfg.sweep_axis = detail::parse_axis(sweep.value("axis", std::string("beta")));
            cfg.sweep_grid = sweep.at("grid").get<std::vector<double>>();
        }
        if (doc.contains("timekeeping")) {
            const auto& tk = doc.at("timekeeping");
            detail::reject_unknown_keys(tk, "timekeeping", {"sigma_grid", "quadrature_points"});
            cfg.sigma_grid = tk.at("sigma_grid").get<std::vector<double>>();
            cfg.quadrature_points = tk.value("quadrature_points", 51);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    try {
        cfg.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

inline ExperimentConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    ExperimentConfig cfg = parse_config(buffer.str());
    if (cfg.name == "run") cfg.name = path.stem().string();
    return cfg;
}

// ---------------------------------------------------------------------------
// presets
// ---------------------------------------------------------------------------

struct Preset {
    std::string name;
    std::string description;
    ExperimentConfig config;
    double runtime_budget_seconds = 120.0;
};

namespace detail {

inline ExperimentConfig bh_distill(std::string name, int L, int N, int l_A, double beta, double dt,
                                   int steps) {
    ExperimentConfig cfg;
    cfg.name = std::move(name);
    cfg.mode = Mode::distill;
    cfg.model = ModelSpec{ModelSpec::Kind::bose_hubbard, L, N, 1.0, 1.0, l_A};
    cfg.beta = beta;
    cfg.greedy.dt = dt;
    cfg.greedy.steps = steps;
    cfg.greedy.base = LogBase::two;
    return cfg;
}

inline ExperimentConfig ising_distill(std::string name, int L, double dt, int steps) {
    ExperimentConfig cfg;
    cfg.name = std::move(name);
    cfg.mode = Mode::distill;
    cfg.model = ModelSpec{ModelSpec::Kind::ising, L, 0, 1.0, 0.0, 1};
    cfg.beta = 1.0;
    cfg.control_set = ControlSet{{1.0, 0.5, 0.3, 0.2, 0.1, 0.0}};
    cfg.greedy.dt = dt;
    cfg.greedy.steps = steps;
    cfg.greedy.base = LogBase::two;
    return cfg;
}

}  // namespace detail

inline const std::vector<Preset>& presets() {
    static const std::vector<Preset> table = [] {
        std::vector<Preset> p;
        auto add = [&p](std::string description, ExperimentConfig cfg, double budget) {
            p.push_back(Preset{cfg.name, std::move(description), std::move(cfg), budget});
        };

        // Convergence table rows: L-site chains at beta = 1 with the first site as A.
        add("3-site chain, 1 boson, T=20", detail::bh_distill("table1_1_3", 3, 1, 1, 1.0, 0.25, 80), 30);
        add("3-site chain, 2 bosons, T=100", detail::bh_distill("table1_2_3", 3, 2, 1, 1.0, 0.1, 1000), 60);
        add("3-site chain, 3 bosons, T=30", detail::bh_distill("table1_3_3", 3, 3, 1, 1.0, 1.5, 20), 30);
        add("4-site chain, 2 bosons, T=30", detail::bh_distill("table1_2_4", 4, 2, 1, 1.0, 0.1, 300), 60);
        add("4-site chain, 3 bosons, T=50", detail::bh_distill("table1_3_4", 4, 3, 1, 1.0, 0.1, 500), 60);
        add("4-site chain, 4 bosons, T=40", detail::bh_distill("table1_4_4", 4, 4, 1, 1.0, 0.1, 400), 60);

        add("entropy trace for the 4-site, 2-boson chain",
            detail::bh_distill("fig2a", 4, 2, 1, 1.0, 0.1, 300), 60);
        {
            ExperimentConfig cfg = detail::bh_distill("fig2b", 4, 2, 1, 1.0, 0.1, 300);
            cfg.mode = Mode::sweep;
            cfg.sweep_axis = SweepAxis::beta;
            for (int k = 1; k <= 25; ++k) cfg.sweep_grid.push_back(0.2 * k);
            add("final entropy against temperature", std::move(cfg), 180);
        }
        {
            ExperimentConfig cfg = detail::bh_distill("fig2c", 4, 2, 1, 1.0, 0.1, 300);
            cfg.mode = Mode::replay;
            cfg.replay_beta = 5.0;
            add("schedule found at beta=1 tested on beta=5", std::move(cfg), 60);
        }
        {
            ExperimentConfig cfg = detail::bh_distill("fig2d", 4, 2, 1, 1.0, 0.1, 300);
            cfg.mode = Mode::sweep;
            cfg.sweep_axis = SweepAxis::beta;
            cfg.sweep_grid = {1.0, 2.0, 5.0};
            add("final boson count of B per temperature", std::move(cfg), 60);
        }
        add("control schedule trace (same run as fig2a)",
            detail::bh_distill("fig2e", 4, 2, 1, 1.0, 0.1, 300), 60);

        add("5-site chain, 2 bosons, two-site A, beta=2",
            detail::bh_distill("fig3a", 5, 2, 2, 2.0, 0.6, 100), 60);
        add("6-site chain, 3 bosons, two-site A, beta=2",
            detail::bh_distill("fig3b", 6, 3, 2, 2.0, 0.5, 120), 60);
        {
            ExperimentConfig cfg = detail::bh_distill("fig3c", 5, 2, 2, 2.0, 0.6, 100);
            cfg.mode = Mode::replay;
            cfg.replay_beta = 1.0;
            add("fig3a schedule tested on beta=1", std::move(cfg), 60);
        }
        {
            ExperimentConfig cfg = detail::bh_distill("fig3d", 6, 3, 2, 2.0, 0.5, 120);
            cfg.mode = Mode::replay;
            cfg.replay_beta = 1.0;
            add("fig3b schedule tested on beta=1", std::move(cfg), 60);
        }

        add("4-qubit transverse Ising chain, T=30", detail::ising_distill("ising_table_s2_4", 4, 0.5, 60), 30);
        add("5-qubit transverse Ising chain, T=500", detail::ising_distill("ising_table_s2_5", 5, 0.5, 1000), 60);
        add("6-qubit transverse Ising chain, T=300", detail::ising_distill("ising_table_s2_6", 6, 0.4, 750), 120);
        add("7-qubit transverse Ising chain, T=420", detail::ising_distill("ising_table_s2_7", 7, 0.5, 840), 240);
        add("8-qubit transverse Ising chain, T=500", detail::ising_distill("ising_table_s2_8", 8, 0.5, 1000), 1800);
        add("10-qubit transverse Ising chain, T=220", detail::ising_distill("ising_table_s2_10", 10, 0.5, 440), 28800);

        {
            ExperimentConfig cfg = detail::bh_distill("timekeeping_bh", 4, 2, 1, 1.0, 0.1, 300);
            cfg.mode = Mode::timekeeping;
            cfg.sigma_grid = {0.0, 0.025, 0.05, 0.075, 0.1};
            add("clock-noise robustness of the 4-site schedule", std::move(cfg), 120);
        }
        {
            ExperimentConfig cfg = detail::ising_distill("timekeeping_ising", 6, 0.5, 600);
            cfg.mode = Mode::timekeeping;
            cfg.sigma_grid = {0.0, 0.05, 0.1, 0.25, 0.5};
            add("clock-noise robustness of the 6-qubit schedule", std::move(cfg), 240);
        }

        {
            ExperimentConfig cfg = detail::bh_distill("purity_fig2a", 4, 2, 1, 1.0, 0.1, 300);
            cfg.greedy.objective = Objective::purity;
            add("fig2a with the purity objective", std::move(cfg), 60);
        }
        {
            // the purity landscape needs a longer horizon to settle on the same plateau
            ExperimentConfig cfg = detail::bh_distill("purity_fig3a", 5, 2, 2, 2.0, 0.8, 150);
            cfg.greedy.objective = Objective::purity;
            add("fig3a with the purity objective", std::move(cfg), 60);
        }
        {
            ExperimentConfig cfg = detail::bh_distill("purity_fig3b", 6, 3, 2, 2.0, 0.5, 480);
            cfg.greedy.objective = Objective::purity;
            add("fig3b with the purity objective", std::move(cfg), 120);
        }
        return p;
    }();
    return table;
}

inline const Preset* find_preset(const std::string& name) {
    for (const auto& p : presets())
        if (p.name == name) return &p;
    return nullptr;
}

inline std::vector<std::string> list_presets() {
    std::vector<std::string> names;
    names.reserve(presets().size());
    for (const auto& p : presets()) names.push_back(p.name);
    return names;
}

// ---------------------------------------------------------------------------
// run dispatch
// ---------------------------------------------------------------------------

namespace detail {

inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min<int>(threads, static_cast<int>(count));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) task(i);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline ModelSpec model_for_sweep(const ExperimentConfig& cfg, double value) {
    ModelSpec m = cfg.model;
    if (cfg.sweep_axis == SweepAxis::hopping) m.hopping = value;
    if (cfg.sweep_axis == SweepAxis::onsite) m.onsite = value;
    return m;
}

inline const char* sweep_axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::beta: return "beta";
        case SweepAxis::hopping: return "J";
        default: return "U";
    }
}

}  // namespace detail

inline RunResult run(const ExperimentConfig& config, const RunOptions& options = {}) {
    ExperimentConfig cfg = config;
    if (options.seed) cfg.greedy.rng_seed = *options.seed;
    if (options.base) cfg.greedy.base = *options.base;
    cfg.validate();

    const auto started = std::chrono::steady_clock::now();
    const std::filesystem::path out_dir(options.out_dir);
    std::filesystem::create_directories(out_dir);

    RunResult result;
    SummaryFields summary;
    summary.delta_t = cfg.greedy.dt;
    summary.objective = cfg.greedy.objective;
    summary.log_base = cfg.greedy.base;

    auto finish = [&](double final_entropy, double bound, double final_n_B, int steps) {
        summary.final_entropy = final_entropy;
        summary.bound = bound;
        summary.difference = final_entropy - bound;
        summary.final_n_B = final_n_B;
        summary.total_time_steps = steps;
        summary.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        const auto path = out_dir / (cfg.name + "_summary.txt");
        write_file_atomic(path, summary_text(summary));
        result.files.push_back(path.string());
        result.final_entropy = final_entropy;
        result.bound = bound;
        result.wall_seconds = summary.wall_seconds;
    };

    auto emit_series = [&](const ExperimentRecord& rec) {
        const auto path = out_dir / (cfg.name + ".csv");
        write_file_atomic(path, series_csv_text(rec));
        result.files.push_back(path.string());
    };

    switch (cfg.mode) {
        case Mode::distill:
        case Mode::random_dt: {
            const System sys = make_system(cfg.model);
            const DensityMatrix rho0 = thermal_initial_state(sys, cfg.beta);
            auto [path, rec] = cfg.mode == Mode::random_dt
                                   ? greedy_distill_random_dt(rho0, sys, cfg.control_set, cfg.greedy, cfg.beta)
                                   : greedy_distill(rho0, sys, cfg.control_set, cfg.greedy, cfg.beta);
            emit_series(rec);
            finish(rec.final_entropy(), rec.bound, rec.n_B.back(), cfg.greedy.steps);
            break;
        }
        case Mode::bound: {
            const System sys = make_system(cfg.model);
            const DensityMatrix rho0 = thermal_initial_state(sys, cfg.beta);
            const BoundReport report = system_bound(sys, rho0, cfg.greedy.base);
            const double s_b0 =
                von_neumann_entropy(partial_trace(rho0, sys.split, Keep::B), cfg.greedy.base);
            double n_b0 = 0.0;
            for (Eigen::Index j = 0; j < rho0.dim(); ++j)
                n_b0 += sys.number_B[j] * rho0.matrix()(j, j).real();
            finish(s_b0, report.bound_entropy, n_b0, 0);
            break;
        }
        case Mode::replay: {
            const System sys = make_system(cfg.model);
            const DensityMatrix rho_search = thermal_initial_state(sys, cfg.beta);
            auto [path, rec_search] =
                greedy_distill(rho_search, sys, cfg.control_set, cfg.greedy, cfg.beta);
            const DensityMatrix rho_target = thermal_initial_state(sys, cfg.replay_beta);
            const ExperimentRecord rec = replay_path(rho_target, path, sys);
            emit_series(rec);
            finish(rec.final_entropy(), rec.bound, rec.n_B.back(), cfg.greedy.steps);
            break;
        }
        case Mode::sweep: {
            struct Row {
                double value, final_entropy, initial_entropy, bound, final_n_B, initial_n_B;
            };
            std::vector<Row> rows(cfg.sweep_grid.size());
            detail::parallel_for(cfg.sweep_grid.size(), options.threads, [&](std::size_t i) {
                const double value = cfg.sweep_grid[i];
                const ModelSpec model = detail::model_for_sweep(cfg, value);
                const double beta = cfg.sweep_axis == SweepAxis::beta ? value : cfg.beta;
                const System sys = make_system(model);
                const DensityMatrix rho0 = thermal_initial_state(sys, beta);
                auto [path, rec] = greedy_distill(rho0, sys, cfg.control_set, cfg.greedy, beta);
                rows[i] = Row{value,         rec.final_entropy(), rec.entropy_B.front(),
                              rec.bound,     rec.n_B.back(),      rec.n_B.front()};
            });
            std::string text = std::string(detail::sweep_axis_name(cfg.sweep_axis)) +
                               ",final_entropy,initial_entropy,bound,difference,final_n_B,initial_n_B\n";
            for (const auto& r : rows) {
                text += format_number(r.value);
                text += ',';
                text += format_number(r.final_entropy);
                text += ',';
                text += format_number(r.initial_entropy);
                text += ',';
                text += format_number(r.bound);
                text += ',';
                text += format_number(r.final_entropy - r.bound);
                text += ',';
                text += format_number(r.final_n_B);
                text += ',';
                text += format_number(r.initial_n_B);
                text += '\n';
            }
            const auto path = out_dir / (cfg.name + "_sweep.csv");
            write_file_atomic(path, text);
            result.files.push_back(path.string());
            const Row& last = rows.back();
            finish(last.final_entropy, last.bound, last.final_n_B, cfg.greedy.steps);
            break;
        }
        case Mode::timekeeping: {
            const System sys = make_system(cfg.model);
            const DensityMatrix rho0 = thermal_initial_state(sys, cfg.beta);
            auto [path, rec] = greedy_distill(rho0, sys, cfg.control_set, cfg.greedy, cfg.beta);
            const auto table =
                timekeeping_robustness(path, rho0, sys, cfg.sigma_grid, cfg.quadrature_points);
            std::string text = "sigma,relative_error,final_entropy\n";
            for (const auto& point : table) {
                text += format_number(point.sigma);
                text += ',';
                text += format_number(point.relative_error);
                text += ',';
                text += format_number(point.final_entropy);
                text += '\n';
            }
            const auto out_path = out_dir / (cfg.name + "_timekeeping.csv");
            write_file_atomic(out_path, text);
            result.files.push_back(out_path.string());
            finish(rec.final_entropy(), rec.bound, rec.n_B.back(), cfg.greedy.steps);
            break;
        }
    }
    return result;
}

}  // namespace qdistill
