#include "pathdev/types.hpp"

#include <algorithm>
#include <cmath>

namespace pathdev {

Tensor::Tensor(int dim, int rank) : dim_(dim), rank_(rank) {
  if (dim < 1 || rank < 0) throw Error(ErrorKind::Argument, "tensor: dim must be >= 1 and rank >= 0");
  std::size_t n = 1;
  for (int r = 0; r < rank; ++r) n *= static_cast<std::size_t>(dim);
  data_.assign(n, 0.0);
}

double Tensor::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

Tensor& Tensor::operator+=(const Tensor& other) {
  if (other.dim_ != dim_ || other.rank_ != rank_) throw Error(ErrorKind::Argument, "tensor shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
  if (other.dim_ != dim_ || other.rank_ != rank_) throw Error(ErrorKind::Argument, "tensor shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Tensor& Tensor::operator*=(double factor) {
  for (double& v : data_) v *= factor;
  return *this;
}

Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
Tensor operator*(double factor, Tensor a) { return a *= factor; }

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace pathdev
