#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ssd/matrix.hpp"
#include "ssd/rng.hpp"

// Shared generators and independent oracles for the test suite. Oracles are
// deliberately written with the most literal algorithm available (explicit
// inverses, all-pairs counting, threshold enumeration) rather than sharing
// code with the library.
namespace test_support {

using ssd::Matrix;

inline Matrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed,
                            double scale = 1.0) {
    ssd::Rng rng(seed);
    Matrix m(n, d);
    for (auto& v : m.data) v = scale * rng.normal();
    return m;
}

inline Matrix random_spd(std::size_t d, std::uint64_t seed) {
    const Matrix a = random_matrix(d, d, seed);
    Matrix s(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < d; ++k) acc += a(i, k) * a(j, k);
            s(i, j) = acc / static_cast<double>(d);
        }
        s(i, i) += 0.5;
    }
    return s;
}

// product of seeded Givens rotations; orthogonal by construction
inline Matrix random_orthogonal(std::size_t d, std::uint64_t seed) {
    ssd::Rng rng(seed);
    Matrix q = Matrix::identity(d);
    const double two_pi = 8.0 * std::atan(1.0);
    for (std::size_t round = 0; round < 4 * d; ++round) {
        std::size_t i = rng.index(d);
        std::size_t j = rng.index(d);
        if (i == j) continue;
        const double ang = two_pi * rng.uniform01();
        const double c = std::cos(ang), s = std::sin(ang);
        for (std::size_t k = 0; k < d; ++k) {
            const double qi = q(k, i), qj = q(k, j);
            q(k, i) = c * qi - s * qj;
            q(k, j) = s * qi + c * qj;
        }
    }
    return q;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double v = a(i, k);
            for (std::size_t j = 0; j < b.cols; ++j) out(i, j) += v * b(k, j);
        }
    return out;
}

inline Matrix transpose(const Matrix& a) {
    Matrix out(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) out(j, i) = a(i, j);
    return out;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

// Gauss-Jordan with partial pivoting; the explicit-inverse oracle
inline Matrix invert_oracle(const Matrix& in) {
    const std::size_t d = in.rows;
    Matrix a = in;
    Matrix inv = Matrix::identity(d);
    for (std::size_t col = 0; col < d; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < d; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        if (a(pivot, col) == 0.0) throw std::runtime_error("oracle: singular matrix");
        if (pivot != col) {
            for (std::size_t j = 0; j < d; ++j) {
                std::swap(a(pivot, j), a(col, j));
                std::swap(inv(pivot, j), inv(col, j));
            }
        }
        const double p = a(col, col);
        for (std::size_t j = 0; j < d; ++j) {
            a(col, j) /= p;
            inv(col, j) /= p;
        }
        for (std::size_t r = 0; r < d; ++r) {
            if (r == col) continue;
            const double f = a(r, col);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < d; ++j) {
                a(r, j) -= f * a(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

inline double quadform_oracle(const Matrix& sigma_inv, const std::vector<double>& mu,
                              const std::vector<double>& z) {
    const std::size_t d = mu.size();
    double q = 0.0;
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b)
            q += (z[a] - mu[a]) * sigma_inv(a, b) * (z[b] - mu[b]);
    return q;
}

// all-pairs Mann-Whitney count, O(n_in * n_ood)
inline double auroc_pairwise_oracle(const std::vector<double>& in_scores,
                                    const std::vector<double>& ood_scores) {
    double wins = 0.0;
    for (double so : ood_scores) {
        for (double si : in_scores) {
            if (so > si)
                wins += 1.0;
            else if (so == si)
                wins += 0.5;
        }
    }
    return wins / (static_cast<double>(in_scores.size()) *
                   static_cast<double>(ood_scores.size()));
}

// every distinct score as a ">= threshold" rule, descending; step-wise area
inline double aupr_enum_oracle(const std::vector<double>& in_scores,
                               const std::vector<double>& ood_scores) {
    std::vector<double> thresholds = ood_scores;
    thresholds.insert(thresholds.end(), in_scores.begin(), in_scores.end());
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    const double n_pos = static_cast<double>(ood_scores.size());
    double area = 0.0, prev_recall = 0.0;
    for (double t : thresholds) {
        double tp = 0.0, fp = 0.0;
        for (double s : ood_scores) tp += s >= t ? 1.0 : 0.0;
        for (double s : in_scores) fp += s >= t ? 1.0 : 0.0;
        const double recall = tp / n_pos;
        const double precision = tp / (tp + fp);
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return area;
}

}  // namespace test_support
