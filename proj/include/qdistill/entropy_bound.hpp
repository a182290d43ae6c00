#pragma once

#include "qdistill/density_matrix.hpp"
#include "qdistill/fock_basis.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace qdistill {

struct SectorPlanEntry {
    int sector_index = 0;  // position in BipartiteSplit::sectors
    int n_A = 0;
    int n_B = 0;
    Eigen::Index d_A = 0;
    Eigen::Index d_B = 0;
    Eigen::Index d = 0;
};

// Sectors ordered by d_A descending; ties broken by n_B ascending so the plan
// (and everything derived from it) is deterministic.
struct SectorPlan {
    std::vector<SectorPlanEntry> entries;
    Eigen::Index total_dim = 0;
};

inline SectorPlan plan_sectors(const BipartiteSplit& sp) {
    SectorPlan plan;
    for (int k = 0; k < static_cast<int>(sp.sectors.size()); ++k) {
        const auto& sec = sp.sectors[static_cast<std::size_t>(k)];
        plan.entries.push_back(SectorPlanEntry{k, sec.n_A, sec.n_B, sec.d_A, sec.d_B,
                                               sec.d_A * sec.d_B});
        plan.total_dim += sec.d_A * sec.d_B;
    }
    std::stable_sort(plan.entries.begin(), plan.entries.end(),
                     [](const SectorPlanEntry& x, const SectorPlanEntry& y) {
                         if (x.d_A != y.d_A) return x.d_A > y.d_A;
                         return x.n_B < y.n_B;
                     });
    return plan;
}

struct BoundReport {
    double bound_entropy = 0.0;
    std::vector<std::vector<double>> q_values;  // one list per plan entry, length d_B
    double optimal_n_B = 0.0;
    std::vector<double> eigenvalues;  // sorted descending, as consumed by the fill
};

namespace detail {

struct EigenvalueGroup {
    int n_B = 0;
    Eigen::Index d_A = 0;
    Eigen::Index d_B = 0;
};

// The minimum-entropy fill: eigenvalues sorted descending are dealt out to the groups
// in plan order, d_A consecutive values per q, d_B q's per group.
inline BoundReport grouped_bound(std::vector<double> evals,
                                 const std::vector<EigenvalueGroup>& groups, LogBase base) {
    Eigen::Index need = 0;
    for (const auto& g : groups) need += g.d_A * g.d_B;
    if (need != static_cast<Eigen::Index>(evals.size()))
        throw std::invalid_argument("grouped_bound: group sizes do not cover the spectrum");

    std::sort(evals.begin(), evals.end(), std::greater<>());
    for (auto& p : evals) p = std::max(p, 0.0);  // eigensolver noise

    BoundReport report;
    report.eigenvalues = evals;
    std::size_t pos = 0;
    for (const auto& g : groups) {
        std::vector<double> qs(static_cast<std::size_t>(g.d_B), 0.0);
        for (Eigen::Index b = 0; b < g.d_B; ++b) {
            double q = 0.0;
            for (Eigen::Index a = 0; a < g.d_A; ++a) q += evals[pos++];
            qs[static_cast<std::size_t>(b)] = q;
            if (q > entropy_clip_floor)
                report.bound_entropy -= q * std::log(q);
            report.optimal_n_B += g.n_B * q;
        }
        report.q_values.push_back(std::move(qs));
    }
    if (base == LogBase::two) report.bound_entropy /= std::log(2.0);
    return report;
}

inline std::vector<double> descending_eigenvalues(const DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("lower_bound: eigendecomposition failed");
    return std::vector<double>(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
}

}  // namespace detail

// Minimum of S(rho_B) over every particle-number-conserving unitary on AB.
inline BoundReport lower_bound(const DensityMatrix& rho_ab, const BipartiteSplit& sp,
                               LogBase base = LogBase::natural) {
    if (rho_ab.basis_tag() != sp.basis_tag || rho_ab.dim() != sp.dim)
        throw std::invalid_argument("lower_bound: state is not bound to this split's basis");
    const SectorPlan plan = plan_sectors(sp);
    std::vector<detail::EigenvalueGroup> groups;
    groups.reserve(plan.entries.size());
    for (const auto& e : plan.entries)
        groups.push_back(detail::EigenvalueGroup{e.n_B, e.d_A, e.d_B});
    return detail::grouped_bound(detail::descending_eigenvalues(rho_ab), groups, base);
}

// Qubit-register specialization: one chunk per group of d_A consecutive eigenvalues.
inline BoundReport lower_bound_qubits(const DensityMatrix& rho_ab, Eigen::Index d_A,
                                      LogBase base = LogBase::natural) {
    if (d_A < 1 || rho_ab.dim() % d_A != 0)
        throw std::invalid_argument("lower_bound_qubits: d_A must divide the state dimension");
    std::vector<detail::EigenvalueGroup> groups{{0, d_A, rho_ab.dim() / d_A}};
    return detail::grouped_bound(detail::descending_eigenvalues(rho_ab), groups, base);
}

// Bounded-total-number variant: the same fill applied to the n_B-block structure.
inline BoundReport lower_bound_nonconserving(const DensityMatrix& rho,
                                             const NonconservingBlocks& blocks,
                                             LogBase base = LogBase::natural) {
    if (rho.basis_tag() != blocks.basis_tag || rho.dim() != blocks.total_dim)
        throw std::invalid_argument("lower_bound_nonconserving: state does not match the block structure");
    std::vector<detail::EigenvalueGroup> groups;
    groups.reserve(blocks.blocks.size());
    for (const auto& blk : blocks.blocks)
        groups.push_back(detail::EigenvalueGroup{blk.n_B, blk.d_A, blk.d_B});
    return detail::grouped_bound(detail::descending_eigenvalues(rho), groups, base);
}

}  // namespace qdistill
