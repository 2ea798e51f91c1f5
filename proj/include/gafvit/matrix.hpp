#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gafvit {

// Dense row-major matrix of doubles. Vectors are stored as 1 x n.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
    Matrix(std::size_t r, std::size_t c, std::vector<double> values);

    static Matrix row_vector(std::vector<double> values);

    std::size_t size() const noexcept { return data.size(); }
    bool same_shape(const Matrix& other) const noexcept { return rows == other.rows && cols == other.cols; }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data.data() + r * cols, cols}; }

    void fill(double v);
    bool all_finite() const noexcept;

    friend bool operator==(const Matrix&, const Matrix&) = default;
};

} // namespace gafvit
