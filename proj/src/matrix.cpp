#include "coulomb/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "coulomb/error.hpp"

namespace coulomb {

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m;
  for (const auto& r : rows) m.append_row(std::vector<double>(r));
  return m;
}

Matrix Matrix::from_rows(const std::vector<Point>& rows) {
  Matrix m;
  for (const auto& r : rows) m.append_row(r);
  return m;
}

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && data_.empty()) {
    cols_ = values.size();
  } else if (values.size() != cols_) {
    throw InputError("row has " + std::to_string(values.size()) + " columns, expected " +
                     std::to_string(cols_));
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

Matrix Matrix::stacked(const Matrix& other) const {
  if (empty()) return other;
  if (other.empty()) return *this;
  if (other.cols_ != cols_) throw InputError("cannot stack matrices with different column counts");
  Matrix out = *this;
  out.data_.insert(out.data_.end(), other.data_.begin(), other.data_.end());
  out.rows_ += other.rows_;
  return out;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace coulomb
