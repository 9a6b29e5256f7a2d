#include "alphaloop/core/matrix.hpp"

#include <cstring>
#include <stdexcept>

namespace alphaloop {

Matrix Matrix::rows_between(std::size_t first, std::size_t last) const {
  if (first > last || last >= rows_) {
    throw std::out_of_range("Matrix::rows_between");
  }
  Matrix out(last - first + 1, cols_);
  std::memcpy(out.data_.data(), data_.data() + first * cols_,
              out.data_.size() * sizeof(double));
  return out;
}

std::size_t Matrix::count_present() const {
  std::size_t n = 0;
  for (double v : data_) {
    if (!is_missing(v)) ++n;
  }
  return n;
}

bool identical(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::memcmp(a.values().data(), b.values().data(),
                     a.values().size() * sizeof(double)) == 0;
}

}  // namespace alphaloop
