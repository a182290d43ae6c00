#pragma once

#include "qdistill/fock_basis.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

namespace qdistill {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline constexpr double hermiticity_tolerance = 1e-12;
inline constexpr int max_ising_sites = 12;

// Dense Hermitian matrix; the constructor rejects anything that is not Hermitian
// to within hermiticity_tolerance elementwise.
class HermitianOperator {
public:
    HermitianOperator() = default;

    explicit HermitianOperator(Matrix m) : mat_(std::move(m)) {
        if (mat_.rows() != mat_.cols())
            throw std::invalid_argument("HermitianOperator: matrix must be square");
        const double dev = (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff();
        if (!(dev <= hermiticity_tolerance))
            throw std::invalid_argument("HermitianOperator: matrix is not Hermitian");
    }

    Eigen::Index dim() const { return mat_.rows(); }
    const Matrix& matrix() const { return mat_; }

private:
    Matrix mat_;
};

struct ModelSpec {
    enum class Kind { bose_hubbard, ising };

    Kind kind = Kind::bose_hubbard;
    int sites = 0;
    int particles = 0;   // bose_hubbard only
    double hopping = 1.0;  // J
    double onsite = 1.0;   // U, bose_hubbard only
    int l_A = 1;

    void validate() const {
        if (sites < 2) throw std::invalid_argument("ModelSpec: need at least two sites");
        if (l_A < 1 || l_A > sites - 1)
            throw std::invalid_argument("ModelSpec: l_A must satisfy 1 <= l_A <= L-1");
        if (!std::isfinite(hopping) || !std::isfinite(onsite))
            throw std::invalid_argument("ModelSpec: couplings must be finite");
        if (kind == Kind::bose_hubbard && particles < 0)
            throw std::invalid_argument("ModelSpec: particle number must be >= 0");
        if (kind == Kind::ising && sites > max_ising_sites)
            throw std::invalid_argument("ModelSpec: Ising register larger than supported size");
    }

    bool same_model(const ModelSpec& o) const {
        return kind == o.kind && sites == o.sites && particles == o.particles &&
               hopping == o.hopping && onsite == o.onsite && l_A == o.l_A;
    }
};

namespace detail {

inline void require_bose_hubbard(const ModelSpec& spec, const FockBasis& basis) {
    spec.validate();
    if (spec.kind != ModelSpec::Kind::bose_hubbard)
        throw std::invalid_argument("operator builder: spec is not a Bose-Hubbard model");
    if (basis.sites() != spec.sites || basis.particles() != spec.particles)
        throw std::invalid_argument("operator builder: basis does not match spec (L, N)");
}

// Adds coeff * (b_i^dag b_j + b_j^dag b_i) over the given basis.
inline void add_hopping_bond(Matrix& h, const FockBasis& basis, int i, int j, double coeff) {
    if (coeff == 0.0) return;
    for (Eigen::Index col = 0; col < basis.dim(); ++col) {
        const auto& occ = basis.state(col);
        // b_i^dag b_j
        if (occ[static_cast<std::size_t>(j)] > 0) {
            OccupationVector moved = occ;
            const double amp = std::sqrt(static_cast<double>(moved[static_cast<std::size_t>(j)])) *
                               std::sqrt(static_cast<double>(moved[static_cast<std::size_t>(i)] + 1));
            --moved[static_cast<std::size_t>(j)];
            ++moved[static_cast<std::size_t>(i)];
            h(basis.index_of(moved), col) += coeff * amp;
        }
        // b_j^dag b_i
        if (occ[static_cast<std::size_t>(i)] > 0) {
            OccupationVector moved = occ;
            const double amp = std::sqrt(static_cast<double>(moved[static_cast<std::size_t>(i)])) *
                               std::sqrt(static_cast<double>(moved[static_cast<std::size_t>(j)] + 1));
            --moved[static_cast<std::size_t>(i)];
            ++moved[static_cast<std::size_t>(j)];
            h(basis.index_of(moved), col) += coeff * amp;
        }
    }
}

}  // namespace detail

// H0 = -J sum_{i=1}^{L-1} (b_i^dag b_{i+1} + h.c.) + (U/2) sum_i n_i (n_i - 1), open boundary.
inline HermitianOperator build_bose_hubbard(const ModelSpec& spec, const FockBasis& basis) {
    detail::require_bose_hubbard(spec, basis);
    Matrix h = Matrix::Zero(basis.dim(), basis.dim());
    for (int site = 0; site + 1 < spec.sites; ++site)
        detail::add_hopping_bond(h, basis, site, site + 1, -spec.hopping);
    for (Eigen::Index j = 0; j < basis.dim(); ++j) {
        double diag = 0.0;
        for (int n : basis.state(j)) diag += 0.5 * spec.onsite * n * (n - 1);
        h(j, j) += diag;
    }
    return HermitianOperator(std::move(h));
}

// H_c = +gamma J (b_{l_A}^dag b_{l_A+1} + h.c.); gamma = 1 cancels the -J boundary
// bond of H0 exactly, switching the A|B coupling off.
inline HermitianOperator build_control(const ModelSpec& spec, const FockBasis& basis, double gamma) {
    detail::require_bose_hubbard(spec, basis);
    if (!std::isfinite(gamma)) throw std::invalid_argument("build_control: gamma must be finite");
    Matrix h = Matrix::Zero(basis.dim(), basis.dim());
    detail::add_hopping_bond(h, basis, spec.l_A - 1, spec.l_A, gamma * spec.hopping);
    return HermitianOperator(std::move(h));
}

// Diagonal particle-number operators of the two halves; n_A + n_B = N * identity.
inline std::pair<HermitianOperator, HermitianOperator> build_number_ops(const FockBasis& basis,
                                                                        const BipartiteSplit& sp) {
    if (sp.basis_tag != basis.tag())
        throw std::invalid_argument("build_number_ops: split does not belong to this basis");
    Matrix na = Matrix::Zero(basis.dim(), basis.dim());
    Matrix nb = Matrix::Zero(basis.dim(), basis.dim());
    for (Eigen::Index j = 0; j < basis.dim(); ++j) {
        const auto& c = sp.sector_of(j);
        na(j, j) = static_cast<double>(c.n_A);
        nb(j, j) = static_cast<double>(c.n_B);
    }
    return {HermitianOperator(std::move(na)), HermitianOperator(std::move(nb))};
}

namespace detail {

// Qubit 1 (1-based) is the most significant bit; bit value 0 means sigma_z = +1.
inline int qubit_bit(int qubits, int site) { return qubits - site; }

inline double sigma_z_value(Eigen::Index basis_index, int qubits, int site) {
    const int bit = (basis_index >> qubit_bit(qubits, site)) & 1;
    return bit == 0 ? 1.0 : -1.0;
}

inline void require_ising(const ModelSpec& spec) {
    spec.validate();
    if (spec.kind != ModelSpec::Kind::ising)
        throw std::invalid_argument("operator builder: spec is not an Ising model");
}

}  // namespace detail

// H0 = -sum_{i=1}^{L-1} J sx_i sx_{i+1} - sum_{i=1}^{L} sz_i, open boundary.
inline HermitianOperator build_ising(const ModelSpec& spec) {
    detail::require_ising(spec);
    const Eigen::Index dim = Eigen::Index{1} << spec.sites;
    Matrix h = Matrix::Zero(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        double field = 0.0;
        for (int site = 1; site <= spec.sites; ++site)
            field -= detail::sigma_z_value(j, spec.sites, site);
        h(j, j) = field;
        for (int site = 1; site < spec.sites; ++site) {
            const Eigen::Index flip = (Eigen::Index{1} << detail::qubit_bit(spec.sites, site)) |
                                      (Eigen::Index{1} << detail::qubit_bit(spec.sites, site + 1));
            h(j ^ flip, j) += -spec.hopping;
        }
    }
    return HermitianOperator(std::move(h));
}

// H_c = +gamma J sx_{l_A} sx_{l_A+1}; gamma = 1 cancels the boundary coupling of H0.
inline HermitianOperator build_ising_control(const ModelSpec& spec, double gamma) {
    detail::require_ising(spec);
    if (!std::isfinite(gamma)) throw std::invalid_argument("build_ising_control: gamma must be finite");
    const Eigen::Index dim = Eigen::Index{1} << spec.sites;
    Matrix h = Matrix::Zero(dim, dim);
    const Eigen::Index flip = (Eigen::Index{1} << detail::qubit_bit(spec.sites, spec.l_A)) |
                              (Eigen::Index{1} << detail::qubit_bit(spec.sites, spec.l_A + 1));
    for (Eigen::Index j = 0; j < dim; ++j) h(j ^ flip, j) += gamma * spec.hopping;
    return HermitianOperator(std::move(h));
}

// Up-spin (|1>) counters of the two halves of a qubit register, the bosonic
// number operators' analogue under the usual boson-to-qubit mapping.
inline std::pair<HermitianOperator, HermitianOperator> build_qubit_number_ops(int qubits, int l_A) {
    if (qubits < 2 || l_A < 1 || l_A > qubits - 1)
        throw std::invalid_argument("build_qubit_number_ops: invalid register split");
    const Eigen::Index dim = Eigen::Index{1} << qubits;
    Matrix na = Matrix::Zero(dim, dim);
    Matrix nb = Matrix::Zero(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        int a = 0, b = 0;
        for (int site = 1; site <= qubits; ++site) {
            const int bit = (j >> detail::qubit_bit(qubits, site)) & 1;
            if (site <= l_A)
                a += bit;
            else
                b += bit;
        }
        na(j, j) = static_cast<double>(a);
        nb(j, j) = static_cast<double>(b);
    }
    return {HermitianOperator(std::move(na)), HermitianOperator(std::move(nb))};
}

}  // namespace qdistill
