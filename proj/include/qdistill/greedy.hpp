#pragma once

#include "qdistill/density_matrix.hpp"
#include "qdistill/entropy_bound.hpp"
#include "qdistill/fock_basis.hpp"
#include "qdistill/operators.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qdistill {

// Candidate control values, evaluated in the given order each step.
struct ControlSet {
    std::vector<double> values;

    void validate() const {
        if (values.empty()) throw std::invalid_argument("ControlSet: must not be empty");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!std::isfinite(values[i]))
                throw std::invalid_argument("ControlSet: values must be finite");
            for (std::size_t j = i + 1; j < values.size(); ++j)
                if (values[i] == values[j])
                    throw std::invalid_argument("ControlSet: duplicate values are forbidden");
        }
    }
};

inline ControlSet default_control_set() {
    return ControlSet{{1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.0}};
}

enum class Objective { entropy, purity };

struct GreedyConfig {
    double dt = 0.1;
    int steps = 100;
    Objective objective = Objective::entropy;
    double tie_epsilon = 1e-12;
    LogBase base = LogBase::natural;
    std::uint64_t rng_seed = 0;
    double dt_sigma = 0.0;  // > 0 only in the random-step variant

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt))
            throw std::invalid_argument("GreedyConfig: dt must be positive and finite");
        if (steps < 1) throw std::invalid_argument("GreedyConfig: need at least one step");
        if (!(tie_epsilon >= 0.0))
            throw std::invalid_argument("GreedyConfig: tie_epsilon must be >= 0");
        if (!(dt_sigma >= 0.0) || !std::isfinite(dt_sigma))
            throw std::invalid_argument("GreedyConfig: dt_sigma must be finite and >= 0");
    }
};

struct ControlStep {
    double gamma = 0.0;
    double dt = 0.0;
};

struct ControlPath {
    std::vector<ControlStep> steps;
    ModelSpec model;  // provenance: what the path was searched on
    double beta = 0.0;
    GreedyConfig config;
};

// Per-step series (length steps + 1, including t = 0) plus the bound of the run's
// own initial state. The gamma entry of row j is the control applied during the
// step that ends at that row; the t = 0 row carries 0.
struct ExperimentRecord {
    std::vector<double> t;
    std::vector<double> entropy_B;
    std::vector<double> entropy_A;
    std::vector<double> entropy_AB;
    std::vector<double> mutual_information_AB;
    std::vector<double> purity_B;
    std::vector<double> n_B;
    std::vector<double> gamma;
    double bound = 0.0;

    double final_entropy() const { return entropy_B.back(); }
    double difference() const { return entropy_B.back() - bound; }
};

// The model, its basis/split and the operators the controller needs, built once.
struct System {
    ModelSpec model;
    std::optional<FockBasis> basis;  // bosonic models only
    BipartiteSplit split;
    HermitianOperator drift;
    Eigen::VectorXd number_A;  // diagonal of n_A in the full basis
    Eigen::VectorXd number_B;

    HermitianOperator control(double gamma) const {
        if (model.kind == ModelSpec::Kind::bose_hubbard)
            return build_control(model, *basis, gamma);
        return build_ising_control(model, gamma);
    }

    HermitianOperator total(double gamma) const {
        if (gamma == 0.0) return drift;
        return HermitianOperator(drift.matrix() + control(gamma).matrix());
    }
};

inline System make_system(const ModelSpec& spec) {
    spec.validate();
    System sys;
    sys.model = spec;
    if (spec.kind == ModelSpec::Kind::bose_hubbard) {
        sys.basis = enumerate_basis(spec.sites, spec.particles);
        sys.split = split(*sys.basis, spec.l_A);
        sys.drift = build_bose_hubbard(spec, *sys.basis);
        auto [na, nb] = build_number_ops(*sys.basis, sys.split);
        sys.number_A = na.matrix().diagonal().real();
        sys.number_B = nb.matrix().diagonal().real();
    } else {
        sys.split = qubit_split(spec.sites, spec.l_A);
        sys.drift = build_ising(spec);
        auto [na, nb] = build_qubit_number_ops(spec.sites, spec.l_A);
        sys.number_A = na.matrix().diagonal().real();
        sys.number_B = nb.matrix().diagonal().real();
    }
    return sys;
}

inline DensityMatrix thermal_initial_state(const System& sys, double beta) {
    return thermal_state(sys.drift, beta, sys.split.basis_tag);
}

// Entropy floor of the given state under the model's conserved structure.
inline BoundReport system_bound(const System& sys, const DensityMatrix& rho0, LogBase base) {
    if (sys.model.kind == ModelSpec::Kind::bose_hubbard) return lower_bound(rho0, sys.split, base);
    return lower_bound_qubits(rho0, sys.split.dim_A, base);
}

namespace detail {

inline double diagonal_expectation(const DensityMatrix& rho, const Eigen::VectorXd& diag) {
    double v = 0.0;
    for (Eigen::Index j = 0; j < rho.dim(); ++j) v += diag[j] * rho.matrix()(j, j).real();
    return v;
}

struct PropagatorCache {
    const System* sys = nullptr;
    std::map<std::pair<std::uint64_t, std::uint64_t>, Propagator> cache;

    const Propagator& get(double gamma, double dt) {
        const auto key = std::make_pair(std::bit_cast<std::uint64_t>(gamma),
                                        std::bit_cast<std::uint64_t>(dt));
        auto it = cache.find(key);
        if (it == cache.end())
            it = cache.emplace(key, Propagator(sys->total(gamma), dt)).first;
        return it->second;
    }
};

inline void record_row(ExperimentRecord& rec, const System& sys, const DensityMatrix& rho,
                       double time, double gamma, LogBase base,
                       const DensityMatrix* rho_b_hint = nullptr) {
    const DensityMatrix rho_b =
        rho_b_hint ? *rho_b_hint : partial_trace(rho, sys.split, Keep::B);
    const DensityMatrix rho_a = partial_trace(rho, sys.split, Keep::A);
    const double s_b = von_neumann_entropy(rho_b, base);
    const double s_a = von_neumann_entropy(rho_a, base);
    const double s_ab = von_neumann_entropy(rho, base);
    rec.t.push_back(time);
    rec.entropy_B.push_back(s_b);
    rec.entropy_A.push_back(s_a);
    rec.entropy_AB.push_back(s_ab);
    rec.mutual_information_AB.push_back(s_a + s_b - s_ab);
    rec.purity_B.push_back(purity(rho_b));
    rec.n_B.push_back(diagonal_expectation(rho, sys.number_B));
    rec.gamma.push_back(gamma);
}

// One greedy selection: every candidate is applied, the objective is compared with
// strict improvement beyond tie_epsilon, and ties go to the larger gamma.
struct StepChoice {
    double gamma = 0.0;
    DensityMatrix state;
    DensityMatrix reduced_b;
};

inline StepChoice greedy_step(const DensityMatrix& rho, const System& sys, const ControlSet& cset,
                              const GreedyConfig& cfg, double dt, PropagatorCache& cache) {
    StepChoice best;
    double best_objective = 0.0;
    bool have_best = false;
    for (double gamma : cset.values) {
        DensityMatrix candidate = evolve(rho, cache.get(gamma, dt));
        DensityMatrix reduced = partial_trace(candidate, sys.split, Keep::B);
        const double objective = cfg.objective == Objective::entropy
                                     ? von_neumann_entropy(reduced, cfg.base)
                                     : purity(reduced);
        bool take = false;
        if (!have_best) {
            take = true;
        } else if (std::abs(objective - best_objective) <= cfg.tie_epsilon) {
            take = gamma > best.gamma;
        } else if (cfg.objective == Objective::entropy) {
            take = objective < best_objective;
        } else {
            take = objective > best_objective;
        }
        if (take) {
            best.gamma = gamma;
            best.state = std::move(candidate);
            best.reduced_b = std::move(reduced);
            best_objective = objective;
            have_best = true;
        }
    }
    return best;
}

inline std::pair<ControlPath, ExperimentRecord> run_greedy(const DensityMatrix& rho0,
                                                           const System& sys,
                                                           const ControlSet& cset,
                                                           const GreedyConfig& cfg, double beta,
                                                           const std::vector<double>& step_durations) {
    cset.validate();
    cfg.validate();
    if (rho0.dim() != sys.split.dim || rho0.basis_tag() != sys.split.basis_tag)
        throw std::invalid_argument("greedy_distill: initial state does not match the system basis");

    ControlPath path;
    path.model = sys.model;
    path.beta = beta;
    path.config = cfg;

    ExperimentRecord rec;
    rec.bound = system_bound(sys, rho0, cfg.base).bound_entropy;
    record_row(rec, sys, rho0, 0.0, 0.0, cfg.base);

    PropagatorCache cache{&sys, {}};
    DensityMatrix rho = rho0;
    double time = 0.0;
    for (double dt : step_durations) {
        StepChoice choice = greedy_step(rho, sys, cset, cfg, dt, cache);
        time += dt;
        rho = std::move(choice.state);
        path.steps.push_back(ControlStep{choice.gamma, dt});
        record_row(rec, sys, rho, time, choice.gamma, cfg.base, &choice.reduced_b);
    }
    return {std::move(path), std::move(rec)};
}

// Portable Box-Muller on mt19937_64 draws; fixed seeds replay bit-identically.
inline double standard_normal(std::mt19937_64& rng) {
    const double scale = 1.0 / (static_cast<double>(std::mt19937_64::max()) + 1.0);
    double u1 = (static_cast<double>(rng()) + 0.5) * scale;
    double u2 = (static_cast<double>(rng()) + 0.5) * scale;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace detail

// Bang-bang schedule search: per step, pick the control value minimizing the next
// subsystem entropy (or maximizing its purity), largest gamma on ties.
inline std::pair<ControlPath, ExperimentRecord> greedy_distill(const DensityMatrix& rho0,
                                                               const System& sys,
                                                               const ControlSet& cset,
                                                               const GreedyConfig& cfg,
                                                               double beta = 0.0) {
    cfg.validate();
    return detail::run_greedy(rho0, sys, cset, cfg, beta,
                              std::vector<double>(static_cast<std::size_t>(cfg.steps), cfg.dt));
}

// Same search with each step duration drawn from N(dt, dt_sigma^2), clipped below
// at dt / 100; recorded durations are the ones actually used.
inline std::pair<ControlPath, ExperimentRecord> greedy_distill_random_dt(const DensityMatrix& rho0,
                                                                         const System& sys,
                                                                         const ControlSet& cset,
                                                                         const GreedyConfig& cfg,
                                                                         double beta = 0.0) {
    cfg.validate();
    std::vector<double> durations(static_cast<std::size_t>(cfg.steps), cfg.dt);
    if (cfg.dt_sigma > 0.0) {
        std::mt19937_64 rng(cfg.rng_seed);
        for (auto& dt : durations)
            dt = std::max(cfg.dt / 100.0, cfg.dt + cfg.dt_sigma * detail::standard_normal(rng));
    }
    return detail::run_greedy(rho0, sys, cset, cfg, beta, durations);
}

// Applies a recorded schedule to a (possibly different-temperature) initial state.
inline ExperimentRecord replay_path(const DensityMatrix& rho0, const ControlPath& path,
                                    const System& sys) {
    if (!path.model.same_model(sys.model))
        throw std::invalid_argument("replay_path: path was searched on a different model");
    if (rho0.dim() != sys.split.dim || rho0.basis_tag() != sys.split.basis_tag)
        throw std::invalid_argument("replay_path: initial state does not match the system basis");

    ExperimentRecord rec;
    rec.bound = system_bound(sys, rho0, path.config.base).bound_entropy;
    detail::record_row(rec, sys, rho0, 0.0, 0.0, path.config.base);

    detail::PropagatorCache cache{&sys, {}};
    DensityMatrix rho = rho0;
    double time = 0.0;
    for (const auto& step : path.steps) {
        rho = evolve(rho, cache.get(step.gamma, step.dt));
        time += step.dt;
        detail::record_row(rec, sys, rho, time, step.gamma, path.config.base);
    }
    return rec;
}

struct TimekeepingPoint {
    double sigma = 0.0;
    double relative_error = 0.0;
    double final_entropy = 0.0;
};

// Replays a schedule under Gaussian clock noise of each given spread and reports the
// relative error of the final subsystem entropy against the noiseless replay.
inline std::vector<TimekeepingPoint> timekeeping_robustness(const ControlPath& path,
                                                            const DensityMatrix& rho0,
                                                            const System& sys,
                                                            const std::vector<double>& sigma_grid,
                                                            int quadrature_points = 51) {
    const ExperimentRecord exact = replay_path(rho0, path, sys);
    const double reference = exact.final_entropy();

    std::vector<TimekeepingPoint> table;
    table.reserve(sigma_grid.size());
    for (double sigma : sigma_grid) {
        TimekeepingPoint point;
        point.sigma = sigma;
        if (sigma == 0.0) {
            point.final_entropy = reference;
            point.relative_error = 0.0;
        } else {
            DensityMatrix rho = rho0;
            for (const auto& step : path.steps)
                rho = imperfect_timekeeping_evolve(rho, sys.total(step.gamma), step.dt, sigma,
                                                   quadrature_points);
            point.final_entropy =
                von_neumann_entropy(partial_trace(rho, sys.split, Keep::B), path.config.base);
            point.relative_error = reference != 0.0
                                       ? std::abs(point.final_entropy - reference) / std::abs(reference)
                                       : std::abs(point.final_entropy - reference);
        }
        table.push_back(point);
    }
    return table;
}

}  // namespace qdistill
