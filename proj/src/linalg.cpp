#include "spikelab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spikelab {

double dot(const Vec& x, const Vec& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

double frobenius_norm(const Mat& a) {
  double s = 0.0;
  const double* p = a.data();
  const std::size_t m = std::size_t(a.rows()) * a.cols();
  for (std::size_t i = 0; i < m; ++i) s += p[i] * p[i];
  return std::sqrt(s);
}

Vec matvec(const Mat& a, const Vec& x) {
  if (int(x.size()) != a.cols()) throw std::invalid_argument("matvec: size mismatch");
  Vec y(a.rows(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    const double* r = a.row(i);
    double s = 0.0;
    for (int j = 0; j < a.cols(); ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

Vec matvec_t(const Mat& a, const Vec& x) {
  if (int(x.size()) != a.rows()) throw std::invalid_argument("matvec_t: size mismatch");
  Vec y(a.cols(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    const double* r = a.row(i);
    const double xi = x[i];
    for (int j = 0; j < a.cols(); ++j) y[j] += xi * r[j];
  }
  return y;
}

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: size mismatch");
  Mat c(a.rows(), b.cols(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    const double* ar = a.row(i);
    double* cr = c.row(i);
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = ar[k];
      if (aik == 0.0) continue;
      const double* br = b.row(k);
      for (int j = 0; j < b.cols(); ++j) cr[j] += aik * br[j];
    }
  }
  return c;
}

Mat crossprod_scaled(const Mat& x, double scale) {
  const int n = x.rows();
  const int p = x.cols();
  Mat s(p, p, 0.0);

  // Upper triangle of X^T X. Rows are consumed in panels so the X panel stays
  // hot while its rank-IB update streams over the (jb, kb) tiles of S.
  constexpr int IB = 32; // row panel
  constexpr int JB = 64; // column tile
  for (int i0 = 0; i0 < n; i0 += IB) {
    const int i1 = std::min(i0 + IB, n);
    for (int j0 = 0; j0 < p; j0 += JB) {
      const int j1 = std::min(j0 + JB, p);
      for (int k0 = j0; k0 < p; k0 += JB) {
        const int k1 = std::min(k0 + JB, p);
        for (int i = i0; i < i1; ++i) {
          const double* xr = x.row(i);
          for (int j = j0; j < j1; ++j) {
            const double xj = xr[j];
            if (xj == 0.0) continue;
            double* sr = s.row(j);
            const int kstart = std::max(k0, j);
            for (int k = kstart; k < k1; ++k) sr[k] += xj * xr[k];
          }
        }
      }
    }
  }

  // Scale and mirror: exact symmetry by construction.
  for (int j = 0; j < p; ++j) {
    double* sj = s.row(j);
    for (int k = j; k < p; ++k) {
      const double v = sj[k] * scale;
      sj[k] = v;
      s(k, j) = v;
    }
  }
  return s;
}

double max_abs_diff(const Mat& a, const Mat& b) {
  double m = 0.0;
  const double* pa = a.data();
  const double* pb = b.data();
  const std::size_t sz = std::size_t(a.rows()) * a.cols();
  for (std::size_t i = 0; i < sz; ++i) m = std::max(m, std::fabs(pa[i] - pb[i]));
  return m;
}

} // namespace spikelab
