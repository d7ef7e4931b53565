#include "spikelab/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "spikelab/rng.hpp"

namespace spikelab::eigen {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();
}

Mat sample_covariance(const Mat& x) {
  if (x.rows() <= x.cols())
    throw std::invalid_argument("sample_covariance: need more rows than columns (n > p), got " +
                                std::to_string(x.rows()) + " x " + std::to_string(x.cols()));
  return crossprod_scaled(x, 1.0 / x.rows());
}

// Householder reduction with full symmetric rank-2 updates. Row-contiguous
// throughout; the reflector for step i survives in row i of the worked matrix.
Tridiagonal tridiagonalize(Mat a) {
  const int p = a.rows();
  if (p != a.cols()) throw std::invalid_argument("tridiagonalize: matrix must be square");
  Tridiagonal t;
  t.d.assign(p, 0.0);
  t.e.assign(p, 0.0);
  t.h.assign(p, 0.0);
  Vec u(p), q(p);
  for (int i = p - 1; i >= 2; --i) {
    const int l = i - 1;
    double* vi = a.row(i);
    double scale = 0.0;
    for (int k = 0; k <= l; ++k) scale += std::fabs(vi[k]);
    if (scale == 0.0) {
      t.e[l] = 0.0;  // row already tridiagonal; no reflector
      continue;
    }
    for (int k = 0; k <= l; ++k) vi[k] /= scale;
    double hh = 0.0;
    for (int k = 0; k <= l; ++k) hh += vi[k] * vi[k];
    const double f = vi[l];
    const double g = (f >= 0.0) ? -std::sqrt(hh) : std::sqrt(hh);
    t.e[l] = scale * g;
    hh -= f * g;  // = v^T v / 2 for the reflector v below
    vi[l] = f - g;
    // u = A v / h over the leading (l+1)-block, then the symmetric correction.
    for (int j = 0; j <= l; ++j) {
      const double* aj = a.row(j);
      double sum = 0.0;
      for (int k = 0; k <= l; ++k) sum += aj[k] * vi[k];
      u[j] = sum / hh;
    }
    double kc = 0.0;
    for (int j = 0; j <= l; ++j) kc += u[j] * vi[j];
    kc /= 2.0 * hh;
    for (int j = 0; j <= l; ++j) q[j] = u[j] - kc * vi[j];
    for (int j = 0; j <= l; ++j) {
      double* aj = a.row(j);
      const double vj = vi[j];
      const double qj = q[j];
      for (int k = 0; k <= l; ++k) aj[k] -= vj * q[k] + qj * vi[k];
    }
    t.h[i] = hh;
  }
  if (p >= 2) t.e[0] = a(1, 0);
  for (int k = 0; k < p; ++k) t.d[k] = a(k, k);
  t.v = std::move(a);
  return t;
}

void apply_q(const Tridiagonal& t, Vec& w) {
  const int p = (int)t.d.size();
  if ((int)w.size() != p) throw ShapeMismatch("apply_q: vector length " + std::to_string(w.size()) +
                                              " vs matrix order " + std::to_string(p));
  for (int i = 2; i < p; ++i) {
    if (t.h[i] == 0.0) continue;
    const double* vi = t.v.row(i);
    double s = 0.0;
    for (int k = 0; k < i; ++k) s += vi[k] * w[k];
    s /= t.h[i];
    for (int k = 0; k < i; ++k) w[k] -= s * vi[k];
  }
}

Mat accumulate_q(const Tridiagonal& t) {
  const int p = (int)t.d.size();
  Mat z(p, p, 0.0);
  for (int k = 0; k < p; ++k) z(k, k) = 1.0;
  Vec row_acc(p);
  for (int i = 2; i < p; ++i) {
    if (t.h[i] == 0.0) continue;
    const double* vi = t.v.row(i);
    // z <- (I - v v^T/h) z, restricted to the leading i-block where v lives
    // and z is still nontrivial.
    std::fill(row_acc.begin(), row_acc.begin() + i, 0.0);
    for (int k = 0; k < i; ++k) {
      const double* zk = z.row(k);
      const double vk = vi[k];
      for (int c = 0; c < i; ++c) row_acc[c] += vk * zk[c];
    }
    for (int c = 0; c < i; ++c) row_acc[c] /= t.h[i];
    for (int k = 0; k < i; ++k) {
      double* zk = z.row(k);
      const double vk = vi[k];
      for (int c = 0; c < i; ++c) zk[c] -= vk * row_acc[c];
    }
  }
  return z;
}

void tqli(Vec& d, Vec& e, Mat* z) {
  const int n = (int)d.size();
  if (n == 0) return;
  if ((int)e.size() < n) throw ShapeMismatch("tqli: e must be padded to the length of d");
  if (z && (z->cols() != n))
    throw ShapeMismatch("tqli: rotation matrix has " + std::to_string(z->cols()) +
                        " columns, need " + std::to_string(n));
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= kEps * dd) break;
      }
      if (m != l) {
        if (iter++ == 50)
          throw NonConvergence("tqli: eigenvalue " + std::to_string(l) +
                               " did not deflate in 50 sweeps");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? r : -r));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          if (z) {
            for (int k = 0; k < z->rows(); ++k) {
              f = (*z)(k, i + 1);
              (*z)(k, i + 1) = s * (*z)(k, i) + c * f;
              (*z)(k, i) = c * (*z)(k, i) - s * f;
            }
          }
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

namespace {

// LU factorization of (T - sigma I) with partial pivoting; T tridiagonal with
// diagonal d and couplings e. Row swaps introduce a second superdiagonal.
struct TriLU {
  int n = 0;
  Vec u0, u1, u2;  // U's diagonal and two superdiagonals
  Vec mult;
  std::vector<unsigned char> swapped;
};

TriLU factor_shifted(const Vec& d, const Vec& e, double sigma, double tiny) {
  const int n = (int)d.size();
  TriLU lu;
  lu.n = n;
  lu.u0.assign(n, 0.0);
  lu.u1.assign(n, 0.0);
  lu.u2.assign(n, 0.0);
  lu.mult.assign(n, 0.0);
  lu.swapped.assign(n, 0);
  Vec b(n), c(n, 0.0), sub(n, 0.0);
  for (int i = 0; i < n; ++i) b[i] = d[i] - sigma;
  for (int i = 0; i + 1 < n; ++i) {
    c[i] = e[i];
    sub[i + 1] = e[i];
  }
  for (int i = 0; i + 1 < n; ++i) {
    if (std::fabs(b[i]) >= std::fabs(sub[i + 1])) {
      double piv = b[i];
      if (piv == 0.0) piv = tiny;
      const double m = sub[i + 1] / piv;
      b[i + 1] -= m * c[i];
      lu.u0[i] = piv;
      lu.u1[i] = c[i];
      lu.u2[i] = 0.0;
      lu.mult[i] = m;
    } else {
      const double m = b[i] / sub[i + 1];  // |m| <= 1, pivot nonzero here
      lu.u0[i] = sub[i + 1];
      lu.u1[i] = b[i + 1];
      lu.u2[i] = c[i + 1];
      b[i + 1] = c[i] - m * b[i + 1];
      c[i + 1] = -m * c[i + 1];
      lu.mult[i] = m;
      lu.swapped[i] = 1;
    }
  }
  lu.u0[n - 1] = (b[n - 1] == 0.0) ? tiny : b[n - 1];
  return lu;
}

void solve_lu(const TriLU& lu, Vec& x) {
  const int n = lu.n;
  for (int i = 0; i + 1 < n; ++i) {
    if (lu.swapped[i]) std::swap(x[i], x[i + 1]);
    x[i + 1] -= lu.mult[i] * x[i];
  }
  x[n - 1] /= lu.u0[n - 1];
  if (n >= 2) x[n - 2] = (x[n - 2] - lu.u1[n - 2] * x[n - 1]) / lu.u0[n - 2];
  for (int i = n - 3; i >= 0; --i)
    x[i] = (x[i] - lu.u1[i] * x[i + 1] - lu.u2[i] * x[i + 2]) / lu.u0[i];
}

void normalize(Vec& w) {
  const double nrm = norm2(w);
  if (nrm > 0.0)
    for (double& v : w) v /= nrm;
}

// Inverse iteration for the given eigenvalue targets of tridiagonal (d, e).
// Targets arriving consecutively within 1e-8 * ||T|| of each other form a
// cluster: their shifts are spread by eps * ||T|| and the iterates are kept
// mutually orthogonal, the standard treatment for packed eigenvalues.
std::vector<Vec> tridiag_eigenvectors(const Vec& d, const Vec& e,
                                      const std::vector<double>& targets) {
  const int n = (int)d.size();
  double anorm = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = std::fabs(d[i]);
    if (i > 0) row += std::fabs(e[i - 1]);
    if (i + 1 < n) row += std::fabs(e[i]);
    anorm = std::max(anorm, row);
  }
  if (anorm == 0.0) anorm = 1.0;
  const double eps3 = kEps * anorm;
  const double cluster_tol = 1e-8 * anorm;
  const double tiny = eps3 > 0.0 ? eps3 : std::numeric_limits<double>::min();

  std::vector<Vec> out;
  out.reserve(targets.size());
  std::size_t cluster_begin = 0;
  double prev_sigma = 0.0;
  for (std::size_t idx = 0; idx < targets.size(); ++idx) {
    double sigma = targets[idx];
    if (idx > 0 && std::fabs(targets[idx] - targets[idx - 1]) <= cluster_tol) {
      if (std::fabs(sigma - prev_sigma) < eps3) sigma = prev_sigma + eps3;
    } else {
      cluster_begin = idx;
    }
    prev_sigma = sigma;

    const TriLU lu = factor_shifted(d, e, sigma, tiny);
    Rng rng(0x5EEDBA5Eu, (std::uint64_t)idx);
    Vec w(n);
    for (int k = 0; k < n; ++k) w[k] = 2.0 * rng.uniform() - 1.0;
    normalize(w);
    for (int it = 0; it < 3; ++it) {
      solve_lu(lu, w);
      for (std::size_t jc = cluster_begin; jc < idx; ++jc) {
        const Vec& prev = out[jc];
        const double proj = dot(prev, w);
        for (int k = 0; k < n; ++k) w[k] -= proj * prev[k];
      }
      normalize(w);
    }
    // Residual in tridiagonal coordinates; back-transforms are orthogonal so
    // this bound carries over to the dense matrix.
    double res = 0.0;
    for (int i = 0; i < n; ++i) {
      double acc = (d[i] - targets[idx]) * w[i];
      if (i > 0) acc += e[i - 1] * w[i - 1];
      if (i + 1 < n) acc += e[i] * w[i + 1];
      res += acc * acc;
    }
    if (!(std::sqrt(res) <= 1e-6 * anorm))
      throw NonConvergence("inverse iteration residual " + std::to_string(std::sqrt(res)) +
                           " too large for eigenvalue " + std::to_string(targets[idx]));
    out.push_back(std::move(w));
  }
  return out;
}

int first_significant(const Vec& v) {
  for (int k = 0; k < (int)v.size(); ++k)
    if (std::fabs(v[k]) > 1e-8) return k;
  return (int)v.size();
}

void sort_pairs_descending(std::vector<EigenPair>& pairs) {
  std::stable_sort(pairs.begin(), pairs.end(), [](const EigenPair& a, const EigenPair& b) {
    if (a.value != b.value) return a.value > b.value;
    const int fa = first_significant(a.vector);
    const int fb = first_significant(b.vector);
    if (fa != fb) return fa < fb;
    if (fa < (int)a.vector.size()) return a.vector[fa] > b.vector[fb];
    return false;
  });
}

}  // namespace

std::vector<EigenPair> full_symmetric_eig(const Mat& s, double tol) {
  const int p = s.rows();
  if (p != s.cols()) throw std::invalid_argument("full_symmetric_eig: matrix must be square");
  if (p == 0) return {};
  Tridiagonal t = tridiagonalize(s);
  Mat z = accumulate_q(t);
  Vec d = t.d, e = t.e;
  tqli(d, e, &z);
  std::vector<EigenPair> pairs(p);
  for (int j = 0; j < p; ++j) {
    pairs[j].value = d[j];
    pairs[j].vector.resize(p);
    for (int k = 0; k < p; ++k) pairs[j].vector[k] = z(k, j);
    normalize(pairs[j].vector);
  }
  sort_pairs_descending(pairs);
  if (tol > 0.0) {
    Mat v(p, p);
    for (int j = 0; j < p; ++j)
      for (int k = 0; k < p; ++k) v(k, j) = pairs[j].vector[k];
    const Mat sv = matmul(s, v);
    double res = 0.0;
    for (int j = 0; j < p; ++j)
      for (int k = 0; k < p; ++k) {
        const double r = sv(k, j) - pairs[j].value * v(k, j);
        res += r * r;
      }
    const double sn = frobenius_norm(s);
    if (!(std::sqrt(res) <= tol * std::max(sn, 1e-300)))
      throw NonConvergence("full_symmetric_eig: reconstruction residual " +
                           std::to_string(std::sqrt(res)) + " exceeds " + std::to_string(tol) +
                           " * ||S||_F");
  }
  return pairs;
}

ExtremeSpectrum extreme_eig(const Mat& s, int k_top, int k_bottom) {
  const int p = s.rows();
  if (p != s.cols()) throw std::invalid_argument("extreme_eig: matrix must be square");
  if (k_top < 0 || k_bottom < 0 || k_top + k_bottom >= p)
    throw std::invalid_argument("extreme_eig: need 0 <= k_top + k_bottom < p");
  Tridiagonal t = tridiagonalize(s);
  Vec d = t.d, e = t.e;
  tqli(d, e, nullptr);
  std::sort(d.begin(), d.end(), std::greater<double>());

  ExtremeSpectrum sp;
  sp.all_values = d;
  sp.bulk_max = d[k_top];
  sp.bulk_min = d[p - 1 - k_bottom];

  std::vector<double> targets;
  targets.reserve(k_top + k_bottom);
  for (int i = 0; i < k_top; ++i) targets.push_back(d[i]);
  for (int i = 0; i < k_bottom; ++i) targets.push_back(d[p - 1 - i]);
  std::vector<Vec> vecs = tridiag_eigenvectors(t.d, t.e, targets);

  const double sn = frobenius_norm(s);
  auto finish = [&](double value, Vec w) {
    apply_q(t, w);
    normalize(w);
    const Vec sw = matvec(s, w);
    double res = 0.0;
    for (int k = 0; k < p; ++k) {
      const double r = sw[k] - value * w[k];
      res += r * r;
    }
    if (!(std::sqrt(res) <= 1e-8 * std::max(sn, 1e-300)))
      throw NonConvergence("extreme_eig: dense residual " + std::to_string(std::sqrt(res)) +
                           " at eigenvalue " + std::to_string(value));
    return EigenPair{value, std::move(w)};
  };
  for (int i = 0; i < k_top; ++i) sp.top.push_back(finish(d[i], std::move(vecs[i])));
  for (int i = 0; i < k_bottom; ++i)
    sp.bottom.push_back(finish(d[p - 1 - i], std::move(vecs[k_top + i])));
  return sp;
}

ExtremeSpectrum extremes_from_full(const std::vector<EigenPair>& pairs, int k_top, int k_bottom) {
  const int p = (int)pairs.size();
  if (k_top < 0 || k_bottom < 0 || k_top + k_bottom >= p)
    throw std::invalid_argument("extremes_from_full: need 0 <= k_top + k_bottom < p");
  ExtremeSpectrum sp;
  sp.all_values.resize(p);
  for (int i = 0; i < p; ++i) sp.all_values[i] = pairs[i].value;
  sp.bulk_max = pairs[k_top].value;
  sp.bulk_min = pairs[p - 1 - k_bottom].value;
  for (int i = 0; i < k_top; ++i) sp.top.push_back(pairs[i]);
  for (int i = 0; i < k_bottom; ++i) sp.bottom.push_back(pairs[p - 1 - i]);
  return sp;
}

OrientedSpectrum oriented_extremes(const ExtremeSpectrum& spectrum, int r_plus, int r_minus,
                                   int r) {
  if (r_plus < 0 || r_minus < 0 || r_plus + r_minus != r)
    throw ShapeMismatch("oriented_extremes: r_plus + r_minus must equal r");
  if ((int)spectrum.top.size() < r_plus || (int)spectrum.bottom.size() < r_minus)
    throw ShapeMismatch("oriented_extremes: spectrum holds fewer extremes than requested");

  auto orient = [&](const EigenPair& pair, int coord) {
    const Vec& w = pair.vector;
    const int p = (int)w.size();
    if (r > p) throw ShapeMismatch("oriented_extremes: spike count exceeds vector length");
    double wu_sq = 0.0;
    for (int k = 0; k < r; ++k) wu_sq += w[k] * w[k];
    const double wu = std::sqrt(wu_sq);
    if (wu < 1e-6)
      throw DegenerateProjection("eigenvector at value " + std::to_string(pair.value) +
                                 " has spike-block mass " + std::to_string(wu));
    const double sign = (w[coord] < 0.0) ? -1.0 : 1.0;
    OrientedPair o;
    o.value = pair.value;
    o.coord = coord;
    o.vector.resize(p);
    for (int k = 0; k < p; ++k) o.vector[k] = sign * w[k];
    o.u_hat.resize(r);
    for (int k = 0; k < r; ++k) o.u_hat[k] = sign * w[k] / wu;
    o.v_hat.resize(p - r);
    double vhat_sq = 0.0;
    for (int k = r; k < p; ++k) {
      o.v_hat[k - r] = sign * w[k] / wu;
      vhat_sq += o.v_hat[k - r] * o.v_hat[k - r];
    }
    o.cos_theta = o.u_hat[coord] / std::sqrt(1.0 + vhat_sq);
    return o;
  };

  OrientedSpectrum out;
  out.bulk_min = spectrum.bulk_min;
  out.bulk_max = spectrum.bulk_max;
  for (int i = 0; i < r_plus; ++i) out.top.push_back(orient(spectrum.top[i], i));
  for (int i = 0; i < r_minus; ++i) out.bottom.push_back(orient(spectrum.bottom[i], r - 1 - i));
  return out;
}

Vec eigenvalues(const Mat& s) {
  Tridiagonal t = tridiagonalize(s);
  Vec d = t.d, e = t.e;
  tqli(d, e, nullptr);
  std::sort(d.begin(), d.end(), std::greater<double>());
  return d;
}

double min_eigenvalue(const Mat& s) {
  if (s.rows() == 0) throw std::invalid_argument("min_eigenvalue: empty matrix");
  return eigenvalues(s).back();
}

}  // namespace spikelab::eigen
