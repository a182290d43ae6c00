#pragma once

#include "qdistill/density_matrix.hpp"
#include "qdistill/oracle.hpp"

#include <algorithm>
#include <random>
#include <vector>

namespace test_support {

using qdistill::Complex;
using qdistill::Matrix;

// Random full-rank mixed state (normalized Wishart).
inline qdistill::DensityMatrix random_mixed_state(Eigen::Index dim, std::mt19937_64& rng,
                                                  const std::string& tag) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix g(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = Complex{gauss(rng), gauss(rng)};
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return qdistill::DensityMatrix(rho, tag);
}

inline qdistill::DensityMatrix random_pure_state(Eigen::Index dim, std::mt19937_64& rng,
                                                 const std::string& tag) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXcd psi(dim);
    for (Eigen::Index i = 0; i < dim; ++i) psi[i] = Complex{gauss(rng), gauss(rng)};
    psi.normalize();
    Matrix rho = psi * psi.adjoint();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return qdistill::DensityMatrix(rho, tag);
}

inline std::vector<double> random_probability_vector(std::size_t n, std::mt19937_64& rng) {
    std::exponential_distribution<double> expd(1.0);
    std::vector<double> p(n);
    double sum = 0.0;
    for (auto& x : p) {
        x = expd(rng);
        sum += x;
    }
    for (auto& x : p) x /= sum;
    return p;
}

// x majorized by y: descending prefix sums of x never exceed those of y, equal totals.
inline bool majorized_by(std::vector<double> x, std::vector<double> y, double tol = 1e-9) {
    if (x.size() != y.size()) return false;
    std::sort(x.begin(), x.end(), std::greater<>());
    std::sort(y.begin(), y.end(), std::greater<>());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        if (sx > sy + tol) return false;
    }
    return std::abs(sx - sy) <= tol;
}

// Birkhoff-style doubly stochastic matrix: convex combination of random permutations.
inline Eigen::MatrixXd random_doubly_stochastic(Eigen::Index n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.1, 1.0);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    double total = 0.0;
    for (int k = 0; k < 2 * n; ++k) {
        std::shuffle(perm.begin(), perm.end(), rng);
        const double w = uni(rng);
        total += w;
        for (Eigen::Index i = 0; i < n; ++i) d(perm[static_cast<std::size_t>(i)], i) += w;
    }
    return d / total;
}

inline std::vector<double> eigenvalues_of(const qdistill::DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix(), Eigen::EigenvaluesOnly);
    return std::vector<double>(es.eigenvalues().data(),
                               es.eigenvalues().data() + es.eigenvalues().size());
}

}  // namespace test_support
