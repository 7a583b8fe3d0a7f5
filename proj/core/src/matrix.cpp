#include "softq/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace softq {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw std::invalid_argument("matrix data size does not match its shape");
  }
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  Matrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) {
      throw std::invalid_argument("ragged rows in matrix literal");
    }
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

std::vector<std::vector<double>> Matrix::to_rows() const {
  std::vector<std::vector<double>> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    auto src = row(r);
    out[r].assign(src.begin(), src.end());
  }
  return out;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("max_abs_diff: size mismatch");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(a[i] - b[i]);
    // inf - inf is treated as agreement; any other NaN poisons the result.
    if (std::isnan(d)) {
      if (a[i] == b[i]) continue;
      return std::numeric_limits<double>::quiet_NaN();
    }
    worst = std::max(worst, d);
  }
  return worst;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  }
  return max_abs_diff(a.data(), b.data());
}

double max_abs(const Matrix& m) {
  double worst = 0.0;
  for (double x : m.data()) worst = std::max(worst, std::abs(x));
  return worst;
}

double min_entry(const Matrix& m) {
  double lo = std::numeric_limits<double>::infinity();
  for (double x : m.data()) lo = std::min(lo, x);
  return lo;
}

double max_entry(const Matrix& m) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : m.data()) hi = std::max(hi, x);
  return hi;
}

bool all_finite(const Matrix& m) {
  return std::all_of(m.data().begin(), m.data().end(),
                     [](double x) { return std::isfinite(x); });
}

}  // namespace softq
