#pragma once

#include "qdistill/fock_basis.hpp"
#include "qdistill/operators.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qdistill {

enum class LogBase { natural, two };

inline constexpr double density_trace_tolerance = 1e-10;
inline constexpr double entropy_clip_floor = 1e-12;

// Unit-trace Hermitian matrix bound to a basis by tag. Positivity is maintained by
// construction everywhere in this library (thermal states, unitary conjugation,
// partial traces, convex mixtures) and asserted in the test suite.
class DensityMatrix {
public:
    DensityMatrix() = default;

    DensityMatrix(Matrix m, std::string basis_tag)
        : mat_(std::move(m)), tag_(std::move(basis_tag)) {
        if (mat_.rows() != mat_.cols() || mat_.rows() == 0)
            throw std::invalid_argument("DensityMatrix: matrix must be square and non-empty");
        const double dev = (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff();
        if (!(dev <= hermiticity_tolerance))
            throw std::invalid_argument("DensityMatrix: matrix is not Hermitian");
        const Complex tr = mat_.trace();
        if (!(std::abs(tr - Complex{1.0, 0.0}) <= density_trace_tolerance))
            throw std::invalid_argument("DensityMatrix: trace must equal 1");
    }

    Eigen::Index dim() const { return mat_.rows(); }
    const Matrix& matrix() const { return mat_; }
    const std::string& basis_tag() const { return tag_; }

private:
    Matrix mat_;
    std::string tag_;
};

namespace detail {

inline Matrix hermitized(Matrix m) {
    Matrix adj = m.adjoint();
    m = 0.5 * (m + adj);
    return m;
}

inline std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t generator_fingerprint(const Matrix& h, double dt) {
    std::uint64_t acc = fnv1a(h.data(), sizeof(Complex) * static_cast<std::size_t>(h.size()),
                              0xcbf29ce484222325ULL);
    return fnv1a(&dt, sizeof dt, acc);
}

}  // namespace detail

// U = exp(-i H dt) by spectral decomposition; exact for Hermitian generators.
class Propagator {
public:
    Propagator() = default;

    Propagator(const HermitianOperator& h, double dt) : dt_(dt) {
        if (!std::isfinite(dt)) throw std::invalid_argument("Propagator: dt must be finite");
        Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix());
        if (es.info() != Eigen::Success)
            throw std::runtime_error("Propagator: eigendecomposition failed");
        Eigen::VectorXcd phases(h.dim());
        for (Eigen::Index i = 0; i < h.dim(); ++i)
            phases[i] = std::exp(Complex{0.0, -es.eigenvalues()[i] * dt});
        mat_ = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
        hash_ = detail::generator_fingerprint(h.matrix(), dt);
    }

    Eigen::Index dim() const { return mat_.rows(); }
    const Matrix& matrix() const { return mat_; }
    double step() const { return dt_; }
    std::uint64_t generator_hash() const { return hash_; }

private:
    Matrix mat_;
    double dt_ = 0.0;
    std::uint64_t hash_ = 0;
};

inline Propagator propagator(const HermitianOperator& h, double dt) { return Propagator(h, dt); }

// rho = exp(-beta H) / Z. The spectrum is shifted by its minimum before
// exponentiation so large beta cannot underflow everything to zero.
inline DensityMatrix thermal_state(const HermitianOperator& h, double beta,
                                   std::string basis_tag = {}) {
    if (!(beta >= 0.0) || !std::isfinite(beta))
        throw std::invalid_argument("thermal_state: beta must be finite and >= 0");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix());
    if (es.info() != Eigen::Success)
        throw std::runtime_error("thermal_state: eigendecomposition failed");
    const double ground = es.eigenvalues().minCoeff();
    Eigen::VectorXd weights = (-beta * (es.eigenvalues().array() - ground)).exp();
    weights /= weights.sum();
    Matrix rho = es.eigenvectors() * weights.cast<Complex>().asDiagonal() *
                 es.eigenvectors().adjoint();
    return DensityMatrix(detail::hermitized(std::move(rho)), std::move(basis_tag));
}

inline DensityMatrix evolve(const DensityMatrix& rho, const Propagator& u) {
    if (rho.dim() != u.dim()) throw std::invalid_argument("evolve: dimension mismatch");
    Matrix m = u.matrix() * rho.matrix() * u.matrix().adjoint();
    return DensityMatrix(detail::hermitized(std::move(m)), rho.basis_tag());
}

enum class Keep { A, B };

inline std::string reduced_tag(const BipartiteSplit& sp, Keep keep) {
    return sp.basis_tag + "|lA=" + std::to_string(sp.l_A) + (keep == Keep::A ? "|A" : "|B");
}

// Reduced state of the kept side. The result is laid out block-by-block in ascending
// occupancy of the kept side; coherences between different occupancies vanish
// identically because the traced side's particle number fixes the kept side's.
inline DensityMatrix partial_trace(const DensityMatrix& rho, const BipartiteSplit& sp, Keep keep) {
    if (rho.basis_tag() != sp.basis_tag)
        throw std::invalid_argument("partial_trace: state is not bound to this split's basis");
    if (rho.dim() != sp.dim) throw std::invalid_argument("partial_trace: dimension mismatch");
    const Matrix& m = rho.matrix();
    const Eigen::Index out_dim = keep == Keep::B ? sp.dim_B : sp.dim_A;
    Matrix out = Matrix::Zero(out_dim, out_dim);
    for (const auto& sec : sp.sectors) {
        if (keep == Keep::B) {
            for (Eigen::Index a = 0; a < sec.d_A; ++a)
                for (Eigen::Index b1 = 0; b1 < sec.d_B; ++b1)
                    for (Eigen::Index b2 = 0; b2 < sec.d_B; ++b2)
                        out(sec.b_offset + b1, sec.b_offset + b2) +=
                            m(sec.global_index(a, b1), sec.global_index(a, b2));
        } else {
            for (Eigen::Index b = 0; b < sec.d_B; ++b)
                for (Eigen::Index a1 = 0; a1 < sec.d_A; ++a1)
                    for (Eigen::Index a2 = 0; a2 < sec.d_A; ++a2)
                        out(sec.a_offset + a1, sec.a_offset + a2) +=
                            m(sec.global_index(a1, b), sec.global_index(a2, b));
        }
    }
    return DensityMatrix(detail::hermitized(std::move(out)), reduced_tag(sp, keep));
}

// -sum p log p with eigenvalues at or below the clip floor contributing zero.
inline double entropy_from_eigenvalues(const Eigen::VectorXd& evals, LogBase base) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < evals.size(); ++i)
        if (evals[i] > entropy_clip_floor) s -= evals[i] * std::log(evals[i]);
    return base == LogBase::two ? s / std::log(2.0) : s;
}

inline double von_neumann_entropy(const DensityMatrix& rho, LogBase base = LogBase::natural) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("von_neumann_entropy: eigendecomposition failed");
    return entropy_from_eigenvalues(es.eigenvalues(), base);
}

inline double purity(const DensityMatrix& rho) { return rho.matrix().squaredNorm(); }

inline double mutual_information(const DensityMatrix& rho_ab, const BipartiteSplit& sp,
                                 LogBase base = LogBase::natural) {
    const double s_a = von_neumann_entropy(partial_trace(rho_ab, sp, Keep::A), base);
    const double s_b = von_neumann_entropy(partial_trace(rho_ab, sp, Keep::B), base);
    return s_a + s_b - von_neumann_entropy(rho_ab, base);
}

// <n_B>. Accepts either the full state on the split's basis or a reduced-B state.
inline double expected_n_B(const DensityMatrix& rho, const BipartiteSplit& sp) {
    if (rho.basis_tag() == sp.basis_tag && rho.dim() == sp.dim) {
        double n = 0.0;
        for (Eigen::Index j = 0; j < sp.dim; ++j)
            n += sp.sector_of(j).n_B * rho.matrix()(j, j).real();
        return n;
    }
    if (rho.basis_tag() == reduced_tag(sp, Keep::B) && rho.dim() == sp.dim_B) {
        double n = 0.0;
        for (const auto& sec : sp.sectors)
            for (Eigen::Index b = 0; b < sec.d_B; ++b)
                n += sec.n_B * rho.matrix()(sec.b_offset + b, sec.b_offset + b).real();
        return n;
    }
    throw std::invalid_argument("expected_n_B: state matches neither the full nor the reduced-B basis");
}

// Evolution for duration tau under a Gaussian-distributed clock tick of spread sigma:
// a renormalized-weight mixture of conjugations over a symmetric grid on tau +- 4 sigma.
// Computed in the eigenbasis of H, where each grid point is an elementwise phase.
inline DensityMatrix imperfect_timekeeping_evolve(const DensityMatrix& rho,
                                                  const HermitianOperator& h, double tau,
                                                  double sigma, int points = 51) {
    if (rho.dim() != h.dim())
        throw std::invalid_argument("imperfect_timekeeping_evolve: dimension mismatch");
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("imperfect_timekeeping_evolve: sigma must be finite and >= 0");
    if (points < 3 || points % 2 == 0)
        throw std::invalid_argument("imperfect_timekeeping_evolve: quadrature points must be odd and >= 3");
    if (sigma == 0.0) return evolve(rho, Propagator(h, tau));

    Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix());
    if (es.info() != Eigen::Success)
        throw std::runtime_error("imperfect_timekeeping_evolve: eigendecomposition failed");
    const auto& v = es.eigenvectors();
    const auto& lam = es.eigenvalues();

    std::vector<double> t(static_cast<std::size_t>(points));
    std::vector<double> w(static_cast<std::size_t>(points));
    double wsum = 0.0;
    for (int m = 0; m < points; ++m) {
        const double x = -4.0 + 8.0 * m / (points - 1);
        t[static_cast<std::size_t>(m)] = tau + sigma * x;
        w[static_cast<std::size_t>(m)] = std::exp(-0.5 * x * x);
        wsum += w[static_cast<std::size_t>(m)];
    }
    for (auto& wi : w) wi /= wsum;

    // kernel(j,k) = sum_m w_m exp(-i (lam_j - lam_k) t_m), a sum of phase outer products
    Matrix rho_e = v.adjoint() * rho.matrix() * v;
    Matrix kernel = Matrix::Zero(rho.dim(), rho.dim());
    Eigen::VectorXcd phases(rho.dim());
    for (int m = 0; m < points; ++m) {
        for (Eigen::Index j = 0; j < rho.dim(); ++j)
            phases[j] = std::exp(Complex{0.0, -lam[j] * t[static_cast<std::size_t>(m)]});
        kernel.noalias() += w[static_cast<std::size_t>(m)] * (phases * phases.adjoint());
    }
    Matrix out = v * kernel.cwiseProduct(rho_e) * v.adjoint();
    return DensityMatrix(detail::hermitized(std::move(out)), rho.basis_tag());
}

}  // namespace qdistill
