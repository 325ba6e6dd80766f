#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ssd/matrix.hpp"

namespace ssd {

// Eigendecomposition of a symmetric matrix. Eigenvalues sorted descending;
// eigenvectors stored as the COLUMNS of `eigenvectors`, orthonormal to 1e-8.
struct SymmetricEigen {
    std::vector<double> eigenvalues;
    Matrix eigenvectors;
};

struct CovarianceEstimate {
    std::vector<double> mean;
    Matrix covariance;
    double shrinkage_intensity = 0.0;  // 0 for plain sample covariance
    std::size_t sample_count = 0;
};

struct NormalizedRows {
    Matrix features;
    bool zero_row_warning = false;  // set if any all-zero row passed through
};

// Columnwise mean and population (1/n) covariance. Throws on zero rows.
CovarianceEstimate sample_mean_cov(const Matrix& samples);

// Ledoit-Wolf shrinkage toward the scaled identity nu*I, nu = trace(S)/d.
// shrinkage_intensity is the optimal rho in [0,1]; n=1 degenerates to rho=1
// and a zero covariance (regularize_spd handles the floor downstream).
CovarianceEstimate ledoit_wolf(const Matrix& samples);

// cov + eps*I with eps = 1e-6 * max(trace/d, 1e-12), applied only when the
// Cholesky of cov fails. Throws if cov is not symmetric.
Matrix regularize_spd(const Matrix& cov);

// Lower-triangular L with L*L^T = spd. Throws "not positive definite".
Matrix cholesky(const Matrix& spd);

// Solves (L*L^T) x = rhs by forward/back substitution.
std::vector<double> solve_spd(const Matrix& chol, std::span<const double> rhs);

// (z-mu)^T Sigma^-1 (z-mu) = ||L^-1 (z-mu)||^2, forward substitution only.
double maha_quadform(const Matrix& chol, std::span<const double> mu,
                     std::span<const double> z);

// Cyclic Jacobi to relative off-diagonal norm <= 1e-12. Throws if input is
// not symmetric.
SymmetricEigen eig_sym(const Matrix& cov);

// Unit l2 norm per row; all-zero rows pass through with the warning flag.
NormalizedRows l2_normalize_rows(const Matrix& features);

bool is_symmetric(const Matrix& m, double tol = 1e-9);

}  // namespace ssd
