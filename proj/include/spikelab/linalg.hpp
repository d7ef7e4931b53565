#pragma once

#include <cstddef>
#include <vector>

namespace spikelab {

using Vec = std::vector<double>;

// Dense row-major matrix. Deliberately minimal: the project needs exactly the
// handful of kernels below, all single-threaded within one call.
class Mat {
public:
  Mat() = default;
  Mat(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(std::size_t(rows) * std::size_t(cols), fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return a_[std::size_t(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[std::size_t(i) * cols_ + j]; }

  double* row(int i) { return a_.data() + std::size_t(i) * cols_; }
  const double* row(int i) const { return a_.data() + std::size_t(i) * cols_; }

  double* data() { return a_.data(); }
  const double* data() const { return a_.data(); }

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

double dot(const Vec& x, const Vec& y);
double norm2(const Vec& x);
double frobenius_norm(const Mat& a);

// y = A x
Vec matvec(const Mat& a, const Vec& x);
// y = A^T x
Vec matvec_t(const Mat& a, const Vec& x);
// C = A B
Mat matmul(const Mat& a, const Mat& b);

// scale * X^T X, exactly symmetric by construction (upper triangle computed,
// then mirrored). Cache-blocked; this is the hot kernel of the whole pipeline.
Mat crossprod_scaled(const Mat& x, double scale);

double max_abs_diff(const Mat& a, const Mat& b);

} // namespace spikelab
