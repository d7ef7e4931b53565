#include "spikelab/bilinear.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spikelab/eigen.hpp"
#include "spikelab/errors.hpp"
#include "spikelab/rng.hpp"
#include "spikelab/stats.hpp"

namespace spikelab::bilinear {

namespace {

bool is_resolvent(MatrixKind kind) {
  return kind == MatrixKind::ResolventA || kind == MatrixKind::ResolventC;
}

// Every non-resolvent matrix is a symmetric Toeplitz band; Identity is the
// band with profile {1}.
Vec toeplitz_profile(const MatrixSpec& spec) {
  if (spec.kind == MatrixKind::Identity) return Vec{1.0};
  return spec.profile;
}

void validate_spec(const MatrixSpec& spec) {
  if (spec.kind == MatrixKind::SymmetricBanded && spec.profile.empty())
    throw std::invalid_argument("banded matrix needs a nonempty profile c_0..c_b");
  if (is_resolvent(spec.kind) && !(spec.alpha > 0.0))
    throw std::invalid_argument("resolvent matrix needs alpha > 0");
}

// Limit of (1/N) sum_s a_ss for one matrix.
double diag_limit(const MatrixSpec& spec, mp::AspectRatio gamma) {
  const double inv_g = 1.0 / gamma.gamma_sq;
  switch (spec.kind) {
    case MatrixKind::Identity:
      return 1.0;
    case MatrixKind::SymmetricBanded:
      return spec.profile.front();
    case MatrixKind::ResolventA:
      return 1.0 + inv_g * mp::m1(spec.alpha, gamma);
    case MatrixKind::ResolventC:
      return inv_g * mp::m3(spec.alpha, gamma);
  }
  throw std::logic_error("diag_limit: unknown matrix kind");
}

}  // namespace

std::string kind_name(MatrixKind kind) {
  switch (kind) {
    case MatrixKind::Identity: return "identity";
    case MatrixKind::SymmetricBanded: return "banded";
    case MatrixKind::ResolventA: return "resolvent_a";
    case MatrixKind::ResolventC: return "resolvent_c";
  }
  throw std::logic_error("kind_name: unknown matrix kind");
}

std::string law_name(VectorLawKind kind) {
  switch (kind) {
    case VectorLawKind::SharedGaussian: return "shared_gaussian";
    case VectorLawKind::IndependentGaussian: return "independent_gaussian";
    case VectorLawKind::SharedRademacher: return "shared_rademacher";
    case VectorLawKind::SharedUniformSym: return "shared_uniform_sym";
  }
  throw std::logic_error("law_name: unknown vector law");
}

double VectorLaw::rho() const {
  return kind == VectorLawKind::IndependentGaussian ? 0.0 : 1.0;
}

double VectorLaw::exxyy() const {
  switch (kind) {
    case VectorLawKind::SharedGaussian: return 3.0;       // E x^4, x standard normal
    case VectorLawKind::IndependentGaussian: return 1.0;  // E x^2 E y^2
    case VectorLawKind::SharedRademacher: return 1.0;     // x^4 = 1
    case VectorLawKind::SharedUniformSym: return 1.8;     // E x^4, x = sqrt(3) U(-1,1)
  }
  throw std::logic_error("exxyy: unknown vector law");
}

TraceLimits pair_limits(const MatrixSpec& l, const MatrixSpec& lp, mp::AspectRatio gamma) {
  validate_spec(l);
  validate_spec(lp);
  TraceLimits out;

  // The diagonal-product limit factors for every kind pair; the dedicated
  // closed forms below keep the resolvent pairs on the same formulas the
  // quadrature oracle certifies.
  const bool res_l = is_resolvent(l.kind);
  const bool res_lp = is_resolvent(lp.kind);
  if (res_l && res_lp) {
    const bool a_l = l.kind == MatrixKind::ResolventA;
    const bool a_lp = lp.kind == MatrixKind::ResolventA;
    if (a_l && a_lp) {
      out.omega = mp::omega_tilde(l.alpha, lp.alpha, gamma);
      out.theta = mp::theta_tilde(l.alpha, lp.alpha, gamma);
    } else if (!a_l && !a_lp) {
      out.omega = mp::zeta_tilde(l.alpha, lp.alpha, gamma);
      out.theta = mp::tau_tilde(l.alpha, lp.alpha, gamma);
    } else {
      const double alpha_a = a_l ? l.alpha : lp.alpha;
      const double alpha_c = a_l ? lp.alpha : l.alpha;
      out.omega = mp::kappa_tilde(alpha_a, alpha_c, gamma);
      out.theta = mp::mu_tilde(alpha_a, alpha_c, gamma);
    }
    return out;
  }

  out.omega = diag_limit(l, gamma) * diag_limit(lp, gamma);
  if (!res_l && !res_lp) {
    // Toeplitz x Toeplitz: offsets contribute c_k c'_k twice off the diagonal.
    const Vec c = toeplitz_profile(l);
    const Vec cp = toeplitz_profile(lp);
    const std::size_t overlap = std::min(c.size(), cp.size());
    double theta = c[0] * cp[0];
    for (std::size_t k = 1; k < overlap; ++k) theta += 2.0 * c[k] * cp[k];
    out.theta = theta;
  } else {
    // Toeplitz x resolvent: only the diagonal c_0 survives the trace limit.
    const MatrixSpec& toep = res_l ? lp : l;
    const MatrixSpec& res = res_l ? l : lp;
    out.theta = toeplitz_profile(toep)[0] * diag_limit(res, gamma);
  }
  return out;
}

CltTheory clt_theory(const CltSpec& spec, mp::AspectRatio gamma) {
  const int k = static_cast<int>(spec.matrices.size());
  if (k == 0) throw std::invalid_argument("clt_theory: no matrices");
  CltTheory out;
  out.omega = Mat(k, k);
  out.theta = Mat(k, k);
  out.d = Mat(k, k);
  const double rho = spec.law.rho();
  out.d1 = spec.law.exxyy() - rho * rho;
  out.d2 = rho * rho + 1.0;
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      const TraceLimits tl = pair_limits(spec.matrices[i], spec.matrices[j], gamma);
      out.omega(i, j) = out.omega(j, i) = tl.omega;
      out.theta(i, j) = out.theta(j, i) = tl.theta;
      const double dij = out.d1 * tl.omega + out.d2 * (tl.theta - tl.omega);
      out.d(i, j) = out.d(j, i) = dij;
    }
  }
  return out;
}

CltHarness::CltHarness(CltSpec spec, double gamma_sq, int n, std::uint64_t noise_seed)
    : spec_(std::move(spec)), n_(n) {
  if (spec_.matrices.empty()) throw std::invalid_argument("CltHarness: no matrices");
  if (n_ < 4) throw std::invalid_argument("CltHarness: n too small");
  bool any_resolvent = false;
  for (const MatrixSpec& m : spec_.matrices) {
    validate_spec(m);
    if (!is_resolvent(m.kind) && toeplitz_profile(m).size() > static_cast<std::size_t>(n_))
      throw std::invalid_argument("CltHarness: band wider than the dimension");
    any_resolvent = any_resolvent || is_resolvent(m.kind);
  }

  const int k = static_cast<int>(spec_.matrices.size());
  lambda_.assign(k, 0.0);
  diag_.resize(k);
  trace_.assign(k, 0.0);

  if (any_resolvent) {
    if (!(gamma_sq > 1.0))
      throw std::invalid_argument("CltHarness: resolvent kinds need gamma_sq > 1");
    p_ = static_cast<int>(std::llround(n_ / gamma_sq));
    if (p_ < 2 || p_ >= n_) throw std::invalid_argument("CltHarness: degenerate aspect ratio");

    Mat noise(n_, p_);
    Rng rng(noise_seed);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < p_; ++j) noise(i, j) = rng.normal();

    const Mat gram = crossprod_scaled(noise, 1.0 / n_);
    const std::vector<eigen::EigenPair> pairs = eigen::full_symmetric_eig(gram);

    // Ascending eigenvalues; W = (noise/sqrt(n)) V has orthonormal columns
    // with ||W_k||^2 = d_k.
    d_.resize(p_);
    Mat v(p_, p_);
    for (int j = 0; j < p_; ++j) {
      const eigen::EigenPair& pair = pairs[p_ - 1 - j];
      d_[j] = pair.value;
      for (int i = 0; i < p_; ++i) v(i, j) = pair.vector[i];
    }
    w_ = matmul(noise, v);
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n_));
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < p_; ++j) w_(i, j) *= inv_sqrt_n;
  }

  const mp::AspectRatio realized{any_resolvent ? static_cast<double>(n_) / p_ : gamma_sq};
  for (int l = 0; l < k; ++l) {
    const MatrixSpec& m = spec_.matrices[l];
    if (is_resolvent(m.kind)) {
      lambda_[l] = mp::rho(m.alpha, realized);
      if (m.alpha > 1.0 ? lambda_[l] <= d_.back() : lambda_[l] >= d_.front())
        throw PackMismatch("resolvent shift " + std::to_string(lambda_[l]) +
                           " inside the realized noise spectrum");
      const Vec wts = resolvent_weights(l);
      const double delta = m.kind == MatrixKind::ResolventA ? 1.0 : 0.0;
      Vec diag(n_, delta);
      for (int s = 0; s < n_; ++s) {
        const double* row = w_.row(s);
        double acc = 0.0;
        for (int j = 0; j < p_; ++j) acc += row[j] * row[j] * wts[j];
        diag[s] += acc;
      }
      diag_[l] = std::move(diag);
      double tr = delta * n_;
      for (int j = 0; j < p_; ++j) tr += d_[j] * wts[j];
      trace_[l] = tr;
    } else {
      const double c0 = toeplitz_profile(m)[0];
      diag_[l].assign(n_, c0);
      trace_[l] = c0 * n_;
    }
  }
}

double CltHarness::realized_gamma_sq() const {
  return p_ > 0 ? static_cast<double>(n_) / p_ : 0.0;
}

double CltHarness::lambda(int l) const { return lambda_.at(l); }

Vec CltHarness::resolvent_weights(int l) const {
  const MatrixSpec& m = spec_.matrices.at(l);
  if (!is_resolvent(m.kind)) return {};
  Vec wts(p_);
  for (int j = 0; j < p_; ++j) {
    const double gap = lambda_[l] - d_[j];
    wts[j] = m.kind == MatrixKind::ResolventA ? 1.0 / gap : 1.0 / (gap * gap);
  }
  return wts;
}

Vec CltHarness::sample(std::uint64_t master_seed, std::uint64_t k) const {
  Rng rng(master_seed, k);
  Vec x(n_);
  for (int s = 0; s < n_; ++s) {
    switch (spec_.law.kind) {
      case VectorLawKind::SharedGaussian:
      case VectorLawKind::IndependentGaussian:
        x[s] = rng.normal();
        break;
      case VectorLawKind::SharedRademacher:
        x[s] = rng.rademacher();
        break;
      case VectorLawKind::SharedUniformSym:
        x[s] = std::sqrt(3.0) * (2.0 * rng.uniform() - 1.0);
        break;
    }
  }
  Vec y_storage;
  const Vec* y = &x;
  if (spec_.law.kind == VectorLawKind::IndependentGaussian) {
    y_storage.resize(n_);
    for (int s = 0; s < n_; ++s) y_storage[s] = rng.normal();
    y = &y_storage;
  }

  // Projections shared across every resolvent component.
  Vec qx;
  Vec qy;
  if (p_ > 0) {
    qx = matvec_t(w_, x);
    qy = (y == &x) ? qx : matvec_t(w_, *y);
  }
  double xy = 0.0;
  for (int s = 0; s < n_; ++s) xy += x[s] * (*y)[s];

  const double rho = spec_.law.rho();
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n_));
  Vec z(spec_.matrices.size());
  for (std::size_t l = 0; l < spec_.matrices.size(); ++l) {
    const MatrixSpec& m = spec_.matrices[l];
    double form = 0.0;
    if (is_resolvent(m.kind)) {
      const Vec wts = resolvent_weights(static_cast<int>(l));
      double acc = 0.0;
      for (int j = 0; j < p_; ++j) acc += qx[j] * qy[j] * wts[j];
      form = (m.kind == MatrixKind::ResolventA ? xy : 0.0) + acc;
    } else {
      const Vec c = toeplitz_profile(m);
      form = c[0] * xy;
      for (std::size_t off = 1; off < c.size(); ++off) {
        double acc = 0.0;
        for (int s = 0; s + static_cast<int>(off) < n_; ++s)
          acc += x[s] * (*y)[s + off] + x[s + off] * (*y)[s];
        form += c[off] * acc;
      }
    }
    z[l] = (form - rho * trace_[l]) * inv_sqrt_n;
  }
  return z;
}

TraceLimits CltHarness::trace_limits_pair(int l, int lp) const {
  const MatrixSpec& a = spec_.matrices.at(l);
  const MatrixSpec& b = spec_.matrices.at(lp);
  TraceLimits out;

  const Vec& da = diag_[l];
  const Vec& db = diag_[lp];
  double acc = 0.0;
  for (int s = 0; s < n_; ++s) acc += da[s] * db[s];
  out.omega = acc / n_;

  const bool res_a = is_resolvent(a.kind);
  const bool res_b = is_resolvent(b.kind);
  if (res_a && res_b) {
    const double delta_a = a.kind == MatrixKind::ResolventA ? 1.0 : 0.0;
    const double delta_b = b.kind == MatrixKind::ResolventA ? 1.0 : 0.0;
    const Vec wa = resolvent_weights(l);
    const Vec wb = resolvent_weights(lp);
    double tr = delta_a * delta_b * n_;
    for (int j = 0; j < p_; ++j)
      tr += d_[j] * (delta_a * wb[j] + delta_b * wa[j]) + d_[j] * d_[j] * wa[j] * wb[j];
    out.theta = tr / n_;
  } else if (!res_a && !res_b) {
    const Vec c = toeplitz_profile(a);
    const Vec cp = toeplitz_profile(b);
    const std::size_t overlap = std::min(c.size(), cp.size());
    double tr = static_cast<double>(n_) * c[0] * cp[0];
    for (std::size_t k = 1; k < overlap; ++k)
      tr += 2.0 * (n_ - static_cast<int>(k)) * c[k] * cp[k];
    out.theta = tr / n_;
  } else {
    const int res_idx = res_a ? l : lp;
    const Vec c = toeplitz_profile(res_a ? b : a);
    const Vec wts = resolvent_weights(res_idx);
    double tr = c[0] * trace_[res_idx];
    for (std::size_t k = 1; k < c.size(); ++k) {
      // sum over the k-th superdiagonal of W diag(wts) W^T
      double sk = 0.0;
      for (int j = 0; j < p_; ++j) {
        double col = 0.0;
        for (int s = 0; s + static_cast<int>(k) < n_; ++s)
          col += w_(s, j) * w_(s + static_cast<int>(k), j);
        sk += wts[j] * col;
      }
      tr += 2.0 * c[k] * sk;
    }
    out.theta = tr / n_;
  }
  return out;
}

double CltHarness::entry_bound(int l) const {
  const MatrixSpec& m = spec_.matrices.at(l);
  if (m.kind == MatrixKind::Identity) return 1.0;
  if (m.kind == MatrixKind::SymmetricBanded) {
    double mx = 0.0;
    for (double c : m.profile) mx = std::max(mx, std::fabs(c));
    return mx;
  }
  // Resolvent part P = W diag(wts) W^T is definite (all weights share one
  // sign), so max_st |P_st| = max_s |P_ss|; add the identity on the diagonal.
  const double delta = m.kind == MatrixKind::ResolventA ? 1.0 : 0.0;
  const Vec& diag = diag_[l];  // delta + P_ss
  double max_diag = 0.0;
  double max_part = 0.0;
  for (int s = 0; s < n_; ++s) {
    max_diag = std::max(max_diag, std::fabs(diag[s]));
    max_part = std::max(max_part, std::fabs(diag[s] - delta));
  }
  return std::max(max_diag, max_part);
}

Vec sample_statistic(const CltSpec& spec, double gamma_sq, int n, std::uint64_t seed) {
  const CltHarness harness(spec, gamma_sq, n, seed);
  return harness.sample(seed, 1);  // noise uses stream 0 of the same seed
}

TraceLimits empirical_trace_limits(const MatrixSpec& spec, double gamma_sq, int n,
                                   std::uint64_t seed) {
  if (n < 200)
    throw std::invalid_argument("empirical_trace_limits needs n >= 200 for a filled spectrum");
  CltSpec cs;
  cs.matrices = {spec};
  const CltHarness harness(std::move(cs), gamma_sq, n, seed);
  return harness.trace_limits(0);
}

DecayReport decay_check(const MatrixSpec& matrix, const VectorLaw& law, double gamma_sq,
                        double kappa, const std::vector<int>& n_grid, int replicates,
                        std::uint64_t master_seed) {
  if (!(kappa > 0.0 && kappa < 0.5))
    throw std::invalid_argument("decay_check: kappa must lie in (0, 1/2)");
  if (n_grid.empty()) throw std::invalid_argument("decay_check: empty n grid");
  if (replicates < 1) throw std::invalid_argument("decay_check: replicates must be >= 1");

  DecayReport report;
  report.kappa = kappa;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    const int n = n_grid[i];
    CltSpec cs;
    cs.matrices = {matrix};
    cs.law = law;
    const CltHarness harness(std::move(cs), gamma_sq, n,
                             Rng::stream_seed(master_seed, 0x10000 + i));
    const std::uint64_t sample_master = Rng::stream_seed(master_seed, 0x20000 + i);
    Vec values(replicates);
    const double scale = std::pow(static_cast<double>(n), kappa - 0.5);
    for (int k = 0; k < replicates; ++k)
      values[k] = scale * std::fabs(harness.sample(sample_master, k)[0]);
    report.rows.push_back({n, stats::median(std::move(values))});
  }
  report.monotone_decreasing = true;
  for (std::size_t i = 1; i < report.rows.size(); ++i)
    report.monotone_decreasing = report.monotone_decreasing &&
                                 report.rows[i].median_value < report.rows[i - 1].median_value;
  return report;
}

}  // namespace spikelab::bilinear
