#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ssd {

// Dense row-major matrix of 64-bit floats. The universal data carrier for
// feature sets (n x d) and covariance matrices (d x d).
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const {
        return {data.data() + i * cols, cols};
    }

    static Matrix identity(std::size_t d) {
        Matrix m(d, d);
        for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0;
        return m;
    }
};

bool all_finite(const Matrix& m);

}  // namespace ssd
