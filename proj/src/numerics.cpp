#include "ssd/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ssd {

bool all_finite(const Matrix& m) {
    for (double v : m.data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

bool is_symmetric(const Matrix& m, double tol) {
    if (m.rows != m.cols) return false;
    double scale = 0.0;
    for (double v : m.data) scale = std::max(scale, std::abs(v));
    const double bound = tol * std::max(1.0, scale);
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = i + 1; j < m.cols; ++j) {
            if (std::abs(m(i, j) - m(j, i)) > bound) return false;
        }
    }
    return true;
}

CovarianceEstimate sample_mean_cov(const Matrix& samples) {
    if (samples.rows == 0) throw std::invalid_argument("sample_mean_cov: no samples");
    const std::size_t n = samples.rows, d = samples.cols;
    CovarianceEstimate est;
    est.sample_count = n;
    est.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto r = samples.row(i);
        for (std::size_t j = 0; j < d; ++j) est.mean[j] += r[j];
    }
    for (double& v : est.mean) v /= static_cast<double>(n);

    est.covariance = Matrix(d, d);
    std::vector<double> c(d);
    for (std::size_t i = 0; i < n; ++i) {
        auto r = samples.row(i);
        for (std::size_t j = 0; j < d; ++j) c[j] = r[j] - est.mean[j];
        for (std::size_t a = 0; a < d; ++a) {
            const double ca = c[a];
            double* out = &est.covariance(a, 0);
            for (std::size_t b = a; b < d; ++b) out[b] += ca * c[b];
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a; b < d; ++b) {
            const double v = est.covariance(a, b) * inv_n;
            est.covariance(a, b) = v;
            est.covariance(b, a) = v;
        }
    }
    return est;
}

CovarianceEstimate ledoit_wolf(const Matrix& samples) {
    CovarianceEstimate est = sample_mean_cov(samples);
    const std::size_t n = samples.rows, d = samples.cols;
    const Matrix& S = est.covariance;

    double trace = 0.0;
    for (std::size_t j = 0; j < d; ++j) trace += S(j, j);
    const double nu = trace / static_cast<double>(d);

    // d^2 = ||S - nu*I||_F^2 / d  (distance of S from the shrinkage target)
    double d2 = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < d; ++b) {
            const double v = S(a, b) - (a == b ? nu : 0.0);
            d2 += v * v;
        }
    }
    d2 /= static_cast<double>(d);

    // b_bar^2 = (1/n^2) sum_k ||x_k x_k^T - S||_F^2 / d  over centered rows
    double b2bar = 0.0;
    std::vector<double> c(d);
    for (std::size_t i = 0; i < n; ++i) {
        auto r = samples.row(i);
        for (std::size_t j = 0; j < d; ++j) c[j] = r[j] - est.mean[j];
        double term = 0.0;
        for (std::size_t a = 0; a < d; ++a) {
            for (std::size_t b = 0; b < d; ++b) {
                const double v = c[a] * c[b] - S(a, b);
                term += v * v;
            }
        }
        b2bar += term;
    }
    b2bar /= static_cast<double>(n) * static_cast<double>(n) * static_cast<double>(d);

    const double b2 = std::min(b2bar, d2);
    const double rho = d2 > 0.0 ? b2 / d2 : 1.0;

    Matrix out(d, d);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < d; ++b) {
            out(a, b) = (1.0 - rho) * S(a, b) + (a == b ? rho * nu : 0.0);
        }
    }
    est.covariance = std::move(out);
    est.shrinkage_intensity = rho;
    return est;
}

namespace {

// Cholesky attempt without throwing; returns false on a non-positive pivot.
bool try_cholesky(const Matrix& a, Matrix& l) {
    const std::size_t d = a.rows;
    l = Matrix(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            if (i == j) {
                if (!(s > 0.0) || !std::isfinite(s)) return false;
                l(i, i) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }
    return true;
}

}  // namespace

Matrix regularize_spd(const Matrix& cov) {
    if (!is_symmetric(cov)) throw std::invalid_argument("regularize_spd: input not symmetric");
    Matrix l;
    if (try_cholesky(cov, l)) return cov;
    const std::size_t d = cov.rows;
    double trace = 0.0;
    for (std::size_t j = 0; j < d; ++j) trace += cov(j, j);
    double eps = 1e-6 * std::max(trace / static_cast<double>(d), 1e-12);
    // one application suffices for covariance-like (near-PSD) inputs; the
    // escalation below only fires for strongly indefinite matrices, so the
    // composition with cholesky cannot fail on symmetric input
    for (int attempt = 0; attempt < 512; ++attempt, eps *= 10.0) {
        Matrix out = cov;
        for (std::size_t j = 0; j < d; ++j) out(j, j) += eps;
        if (try_cholesky(out, l)) return out;
    }
    throw std::domain_error("regularize_spd: could not reach positive definite");
}

Matrix cholesky(const Matrix& spd) {
    if (!is_symmetric(spd)) throw std::invalid_argument("cholesky: input not symmetric");
    Matrix l;
    if (!try_cholesky(spd, l)) throw std::domain_error("cholesky: not positive definite");
    return l;
}

std::vector<double> solve_spd(const Matrix& chol, std::span<const double> rhs) {
    const std::size_t d = chol.rows;
    if (rhs.size() != d) throw std::invalid_argument("solve_spd: dimension mismatch");
    std::vector<double> y(d);
    for (std::size_t i = 0; i < d; ++i) {  // forward: L y = rhs
        double s = rhs[i];
        for (std::size_t k = 0; k < i; ++k) s -= chol(i, k) * y[k];
        y[i] = s / chol(i, i);
    }
    for (std::size_t ii = d; ii-- > 0;) {  // back: L^T x = y
        double s = y[ii];
        for (std::size_t k = ii + 1; k < d; ++k) s -= chol(k, ii) * y[k];
        y[ii] = s / chol(ii, ii);
    }
    return y;
}

double maha_quadform(const Matrix& chol, std::span<const double> mu,
                     std::span<const double> z) {
    const std::size_t d = chol.rows;
    if (mu.size() != d || z.size() != d)
        throw std::invalid_argument("maha_quadform: dimension mismatch");
    std::vector<double> w(d);
    double q = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        double s = z[i] - mu[i];
        for (std::size_t k = 0; k < i; ++k) s -= chol(i, k) * w[k];
        w[i] = s / chol(i, i);
        q += w[i] * w[i];
    }
    return q;
}

SymmetricEigen eig_sym(const Matrix& cov) {
    if (!is_symmetric(cov)) throw std::invalid_argument("eig_sym: input not symmetric");
    const std::size_t d = cov.rows;
    Matrix a = cov;
    Matrix q = Matrix::identity(d);

    double frob = 0.0;
    for (double v : a.data) frob += v * v;
    frob = std::sqrt(frob);
    const double target = 1e-12 * std::max(frob, 1e-300);

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t r = p + 1; r < d; ++r) off += 2.0 * a(p, r) * a(p, r);
        }
        if (std::sqrt(off) <= target) break;

        for (std::size_t p = 0; p + 1 < d; ++p) {
            for (std::size_t r = p + 1; r < d; ++r) {
                const double apq = a(p, r);
                if (apq == 0.0) continue;
                const double theta = (a(r, r) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < d; ++k) {  // rotate rows/cols p,r of A
                    const double akp = a(k, p), akq = a(k, r);
                    a(k, p) = c * akp - s * akq;
                    a(k, r) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double apk = a(p, k), aqk = a(r, k);
                    a(p, k) = c * apk - s * aqk;
                    a(r, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < d; ++k) {  // accumulate Q
                    const double qkp = q(k, p), qkq = q(k, r);
                    q(k, p) = c * qkp - s * qkq;
                    q(k, r) = s * qkp + c * qkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

    SymmetricEigen out;
    out.eigenvalues.resize(d);
    out.eigenvectors = Matrix(d, d);
    for (std::size_t j = 0; j < d; ++j) {
        out.eigenvalues[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < d; ++i) out.eigenvectors(i, j) = q(i, order[j]);
    }
    return out;
}

NormalizedRows l2_normalize_rows(const Matrix& features) {
    NormalizedRows out;
    out.features = features;
    for (std::size_t i = 0; i < features.rows; ++i) {
        auto r = out.features.row(i);
        double norm2 = 0.0;
        for (double v : r) norm2 += v * v;
        if (norm2 == 0.0) {
            out.zero_row_warning = true;
            continue;
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& v : r) v *= inv;
    }
    return out;
}

}  // namespace ssd
