#pragma once

#include "qdistill/density_matrix.hpp"
#include "qdistill/entropy_bound.hpp"
#include "qdistill/fock_basis.hpp"
#include "qdistill/operators.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

// Brute-force verifiers. Everything here reaches the subsystem entropy the long way
// round (explicit unitaries, conjugation, partial trace) so it can stand against the
// closed-form machinery instead of sharing code paths with it.
namespace qdistill::oracle {

inline Matrix random_unitary(Eigen::Index dim, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix g(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = Complex{gauss(rng), gauss(rng)};
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < dim; ++i) {
        const Complex d = r(i, i);
        const Complex phase = std::abs(d) > 0 ? d / std::abs(d) : Complex{1.0, 0.0};
        q.col(i) *= phase;
    }
    return q;
}

// Block-diagonal over the split's (n_A, n_B) sectors; conserves both n_A and n_B.
inline Matrix random_sector_unitary(const BipartiteSplit& sp, std::mt19937_64& rng) {
    Matrix u = Matrix::Zero(sp.dim, sp.dim);
    for (const auto& sec : sp.sectors) {
        const Eigen::Index d = sec.d_A * sec.d_B;
        Matrix block = random_unitary(d, rng);
        for (Eigen::Index r = 0; r < d; ++r)
            for (Eigen::Index c = 0; c < d; ++c)
                u(sec.global[static_cast<std::size_t>(r)], sec.global[static_cast<std::size_t>(c)]) =
                    block(r, c);
    }
    return u;
}

struct OracleResult {
    double best_entropy = 0.0;
    std::vector<Eigen::Index> best_assignment;  // eigenvalue rank placed at each fill slot
    int trials = 0;
};

namespace detail {

inline double subsystem_entropy(const Matrix& rho, const BipartiteSplit& sp, LogBase base) {
    DensityMatrix state(qdistill::detail::hermitized(rho), sp.basis_tag);
    return von_neumann_entropy(partial_trace(state, sp, Keep::B), base);
}

// Fill slots in plan order; within a sector consecutive slots share the B index,
// which is what makes a chunk of the sorted spectrum collapse into one q.
inline std::vector<Eigen::Index> fill_slot_order(const BipartiteSplit& sp) {
    const SectorPlan plan = plan_sectors(sp);
    std::vector<Eigen::Index> slots;
    slots.reserve(static_cast<std::size_t>(sp.dim));
    for (const auto& e : plan.entries) {
        const auto& sec = sp.sectors[static_cast<std::size_t>(e.sector_index)];
        for (Eigen::Index b = 0; b < sec.d_B; ++b)
            for (Eigen::Index a = 0; a < sec.d_A; ++a) slots.push_back(sec.global_index(a, b));
    }
    return slots;
}

}  // namespace detail

// Random search plus local refinement for min_U S(Tr_A U rho U^dag) over the fixed-N
// space (every unitary there conserves the total number). Candidates rearrange the
// eigenvectors of rho onto the sector grid and optionally rotate inside sectors;
// refinement applies small Givens rotations in the full space, keeping improvements.
inline OracleResult brute_force_min_entropy(const DensityMatrix& rho, const BipartiteSplit& sp,
                                            int trials, std::uint64_t seed,
                                            LogBase base = LogBase::natural) {
    if (rho.dim() > 20)
        throw std::invalid_argument("brute_force_min_entropy: dimension guard (dim <= 20)");
    if (rho.basis_tag() != sp.basis_tag || rho.dim() != sp.dim)
        throw std::invalid_argument("brute_force_min_entropy: state is not bound to this split's basis");
    if (trials < 1) throw std::invalid_argument("brute_force_min_entropy: need at least one trial");

    const Eigen::Index dim = rho.dim();
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
    if (es.info() != Eigen::Success)
        throw std::runtime_error("brute_force_min_entropy: eigendecomposition failed");
    std::vector<double> evals(static_cast<std::size_t>(dim));
    for (Eigen::Index i = 0; i < dim; ++i)
        evals[static_cast<std::size_t>(i)] = std::max(es.eigenvalues()[dim - 1 - i], 0.0);
    const double esum = std::accumulate(evals.begin(), evals.end(), 0.0);
    for (auto& p : evals) p /= esum;

    const std::vector<Eigen::Index> slots = detail::fill_slot_order(sp);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> coin(0, 1);

    std::vector<Eigen::Index> perm(static_cast<std::size_t>(dim));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});

    OracleResult result;
    result.trials = trials;
    result.best_entropy = std::numeric_limits<double>::infinity();
    Matrix best_state;

    for (int t = 0; t < trials; ++t) {
        if (t > 0) std::shuffle(perm.begin(), perm.end(), rng);
        Matrix state = Matrix::Zero(dim, dim);
        for (Eigen::Index s = 0; s < dim; ++s)
            state(slots[static_cast<std::size_t>(s)], slots[static_cast<std::size_t>(s)]) =
                evals[static_cast<std::size_t>(perm[static_cast<std::size_t>(s)])];
        if (t > 0 && coin(rng)) {
            const Matrix u = random_sector_unitary(sp, rng);
            state = u * state * u.adjoint();
        }
        const double s_b = detail::subsystem_entropy(state, sp, base);
        if (s_b < result.best_entropy) {
            result.best_entropy = s_b;
            result.best_assignment = perm;
            best_state = state;
        }
    }

    // Coordinate-wise refinement: random two-level rotations, accepted on improvement.
    const int refine_steps = std::max(200, 40 * static_cast<int>(dim));
    std::uniform_int_distribution<Eigen::Index> pick(0, dim - 1);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int step = 0; step < refine_steps; ++step) {
        Eigen::Index i = pick(rng), j = pick(rng);
        if (i == j) continue;
        const double scale = 0.6 * std::exp(-3.0 * step / refine_steps) + 0.02;
        const double theta = scale * gauss(rng);
        const Complex phase = std::exp(Complex{0.0, 2.0 * M_PI * uni(rng)});
        Matrix g = Matrix::Identity(dim, dim);
        g(i, i) = std::cos(theta);
        g(j, j) = std::cos(theta);
        g(i, j) = -std::conj(phase) * std::sin(theta);
        g(j, i) = phase * std::sin(theta);
        Matrix candidate = g * best_state * g.adjoint();
        const double s_b = detail::subsystem_entropy(candidate, sp, base);
        if (s_b < result.best_entropy) {
            result.best_entropy = s_b;
            best_state = std::move(candidate);
        }
    }
    return result;
}

// Matrix of b_site from the N-particle basis to the (N-1)-particle basis.
inline Matrix annihilation_matrix(const FockBasis& basis_n, const FockBasis& basis_nm1, int site) {
    if (basis_nm1.sites() != basis_n.sites() || basis_nm1.particles() != basis_n.particles() - 1)
        throw std::invalid_argument("annihilation_matrix: bases must differ by one particle");
    if (site < 0 || site >= basis_n.sites())
        throw std::invalid_argument("annihilation_matrix: site out of range");
    Matrix b = Matrix::Zero(basis_nm1.dim(), basis_n.dim());
    for (Eigen::Index j = 0; j < basis_n.dim(); ++j) {
        OccupationVector occ = basis_n.state(j);
        const int n = occ[static_cast<std::size_t>(site)];
        if (n == 0) continue;
        --occ[static_cast<std::size_t>(site)];
        b(basis_nm1.index_of(occ), j) = std::sqrt(static_cast<double>(n));
    }
    return b;
}

// Rebuilds the drift Hamiltonian from explicit ladder-operator matrices and compares
// it elementwise against build_bose_hubbard.
inline bool second_quantized_matrix_check(const ModelSpec& spec, const FockBasis& basis,
                                          double tol = 1e-12) {
    const Matrix built = build_bose_hubbard(spec, basis).matrix();
    Matrix ref = Matrix::Zero(basis.dim(), basis.dim());
    if (spec.particles >= 1) {
        const FockBasis lowered(spec.sites, spec.particles - 1);
        std::vector<Matrix> b_ops;
        b_ops.reserve(static_cast<std::size_t>(spec.sites));
        for (int site = 0; site < spec.sites; ++site)
            b_ops.push_back(annihilation_matrix(basis, lowered, site));
        for (int site = 0; site + 1 < spec.sites; ++site) {
            const Matrix hop = b_ops[static_cast<std::size_t>(site)].adjoint() *
                               b_ops[static_cast<std::size_t>(site + 1)];
            ref += -spec.hopping * (hop + hop.adjoint());
        }
        for (int site = 0; site < spec.sites; ++site) {
            const Matrix n_op = b_ops[static_cast<std::size_t>(site)].adjoint() *
                                b_ops[static_cast<std::size_t>(site)];
            ref += 0.5 * spec.onsite * (n_op * n_op - n_op);
        }
    }
    return (built - ref).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace qdistill::oracle
