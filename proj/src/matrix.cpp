#include "gafvit/matrix.hpp"

#include "gafvit/error.hpp"

#include <algorithm>
#include <cmath>

namespace gafvit {

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values) : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != r * c)
        raise(Errc::ShapeMismatch, "matrix " + std::to_string(r) + "x" + std::to_string(c) + " given " +
                                       std::to_string(data.size()) + " values");
}

Matrix Matrix::row_vector(std::vector<double> values) {
    const std::size_t n = values.size();
    return Matrix(1, n, std::move(values));
}

void Matrix::fill(double v) { std::fill(data.begin(), data.end(), v); }

bool Matrix::all_finite() const noexcept {
    return std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); });
}

} // namespace gafvit
