#include "spikelab/model.hpp"

#include <cmath>
#include <stdexcept>

#include "spikelab/mp.hpp"
#include "spikelab/rng.hpp"

namespace spikelab {

double DistributionFamily::marginal_fourth() const {
  switch (kind) {
    case FamilyKind::Gaussian: return 3.0;
    case FamilyKind::Rademacher: return 1.0;
    case FamilyKind::UniformSym: return 9.0 / 5.0;
    case FamilyKind::ScaleMixtureGaussian: return 3.0 * mixture.e_r4();
  }
  throw std::logic_error("unknown family kind");
}

double DistributionFamily::cross_fourth() const {
  // E[w_i^2 w_j^2] for i != j: independent unit-variance coordinates give 1;
  // the shared radial factor of the scale mixture lifts it to E r^4.
  return kind == FamilyKind::ScaleMixtureGaussian ? mixture.e_r4() : 1.0;
}

int ModelConfig::r() const {
  int total = 0;
  for (const auto& sp : spikes) total += sp.multiplicity;
  return total;
}

int ModelConfig::r_plus() const {
  int total = 0;
  for (const auto& sp : spikes)
    if (sp.alpha > 1.0) total += sp.multiplicity;
  return total;
}

int ModelConfig::r_minus() const {
  int total = 0;
  for (const auto& sp : spikes)
    if (sp.alpha < 1.0) total += sp.multiplicity;
  return total;
}

int ModelConfig::pack_offset(int pack) const {
  if (pack < 0 || pack >= int(spikes.size())) throw std::out_of_range("pack_offset");
  int off = 0;
  for (int j = 0; j < pack; ++j) off += spikes[j].multiplicity;
  return off;
}

std::vector<ValidationIssue> validate(const ModelConfig& config) {
  std::vector<ValidationIssue> issues;
  auto error = [&](const std::string& m) { issues.push_back({true, m}); };
  auto warn = [&](const std::string& m) { issues.push_back({false, m}); };

  if (!(config.gamma_sq > 1.0))
    error("gamma_sq must exceed 1 (got " + std::to_string(config.gamma_sq) + ")");
  if (config.n <= 0) error("n must be positive");
  if (config.spikes.empty()) error("at least one spike is required");

  for (std::size_t j = 0; j < config.spikes.size(); ++j) {
    const auto& sp = config.spikes[j];
    if (!(sp.alpha > 0.0)) error("spike alpha must be positive");
    if (sp.alpha == 1.0) error("spike alpha must differ from 1");
    if (sp.multiplicity < 1) error("spike multiplicity must be at least 1");
    if (j > 0 && !(config.spikes[j - 1].alpha > sp.alpha))
      error("spike alphas must be distinct and strictly decreasing");
  }

  if (config.family.kind == FamilyKind::ScaleMixtureGaussian) {
    const auto& mix = config.family.mixture;
    if (!(mix.r_sq_a > 0.0) || !(mix.r_sq_b > 0.0)) error("mixture r^2 values must be positive");
    if (!(mix.weight_a > 0.0) || !(mix.weight_a < 1.0))
      error("mixture weight must lie strictly between 0 and 1");
    if (std::fabs(mix.e_r2() - 1.0) > 1e-12)
      error("mixture must have E r^2 = 1 (got " + std::to_string(mix.e_r2()) + ")");
  }

  if (has_errors(issues)) return issues; // geometry checks below need sane inputs

  const int p = config.p();
  if (p < 1) error("p = round(n/gamma_sq) must be at least 1");
  if (config.n <= p) error("n must exceed p = round(n/gamma_sq)");
  if (config.r() >= p) error("total spike count must be below p");

  const mp::AspectRatio gamma{config.realized_gamma_sq()};
  for (const auto& sp : config.spikes) {
    if (!mp::is_supercritical(mp::classify_spike(sp.alpha, gamma)))
      warn("spike alpha=" + std::to_string(sp.alpha) +
           " lies in the transition window and will not detach");
    if (sp.multiplicity > 1)
      warn("spike alpha=" + std::to_string(sp.alpha) +
           " has multiplicity > 1: eigenvector and angle statistics are skipped "
           "(distinct spikes required)");
  }
  if (std::fabs(config.realized_gamma_sq() - config.gamma_sq) > 0.01 * config.gamma_sq)
    warn("realized aspect ratio n/p deviates from nominal gamma_sq by more than 1%");
  return issues;
}

bool has_errors(const std::vector<ValidationIssue>& issues) {
  for (const auto& issue : issues)
    if (issue.is_error) return true;
  return false;
}

double coordinate_alpha(const ModelConfig& config, int i) {
  if (i < 0) throw std::out_of_range("coordinate_alpha: negative index");
  int off = 0;
  for (const auto& sp : config.spikes) {
    if (i < off + sp.multiplicity) return sp.alpha;
    off += sp.multiplicity;
  }
  throw std::out_of_range("coordinate_alpha: index beyond spike block");
}

double fourth_moment(const ModelConfig& config, int i, int j, int k, int l) {
  const double ai = coordinate_alpha(config, i);
  const double aj = coordinate_alpha(config, j);
  const double ak = coordinate_alpha(config, k);
  const double al = coordinate_alpha(config, l);

  // Group the four indices by value; symmetric zero-mean coordinates make any
  // index with odd count kill the expectation.
  int idx[4] = {i, j, k, l};
  double alphas[4] = {ai, aj, ak, al};
  int distinct[4];
  int counts[4];
  double dalpha[4];
  int ndistinct = 0;
  for (int t = 0; t < 4; ++t) {
    bool found = false;
    for (int u = 0; u < ndistinct; ++u) {
      if (distinct[u] == idx[t]) {
        ++counts[u];
        found = true;
        break;
      }
    }
    if (!found) {
      distinct[ndistinct] = idx[t];
      counts[ndistinct] = 1;
      dalpha[ndistinct] = alphas[t];
      ++ndistinct;
    }
  }

  if (ndistinct == 1) return dalpha[0] * dalpha[0] * config.family.marginal_fourth();
  if (ndistinct == 2 && counts[0] == 2 && counts[1] == 2)
    return dalpha[0] * dalpha[1] * config.family.cross_fourth();
  return 0.0;
}

void sample_xi_row(const ModelConfig& config, Rng& rng, double* out) {
  const int r = config.r();
  int c = 0;
  for (const auto& sp : config.spikes) {
    const double sa = std::sqrt(sp.alpha);
    for (int m = 0; m < sp.multiplicity; ++m, ++c) {
      switch (config.family.kind) {
        case FamilyKind::Gaussian:
        case FamilyKind::ScaleMixtureGaussian: out[c] = sa * rng.normal(); break;
        case FamilyKind::Rademacher: out[c] = sa * rng.rademacher(); break;
        case FamilyKind::UniformSym:
          out[c] = sa * (2.0 * rng.uniform() - 1.0) * 1.7320508075688772;
          break;
      }
    }
  }
  if (config.family.kind == FamilyKind::ScaleMixtureGaussian) {
    const auto& mix = config.family.mixture;
    const double r_sq = rng.uniform() < mix.weight_a ? mix.r_sq_a : mix.r_sq_b;
    const double scale = std::sqrt(r_sq);
    for (int c2 = 0; c2 < r; ++c2) out[c2] *= scale;
  }
}

Mat sample_data(const ModelConfig& config, std::uint64_t seed) {
  const auto issues = validate(config);
  if (has_errors(issues)) {
    std::string msg = "sample_data: invalid config:";
    for (const auto& issue : issues)
      if (issue.is_error) msg += " " + issue.message + ";";
    throw std::invalid_argument(msg);
  }

  const int n = config.n;
  const int p = config.p();
  const int r = config.r();
  Mat x(n, p);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    double* row = x.row(i);
    sample_xi_row(config, rng, row);
    switch (config.family.kind) {
      case FamilyKind::Gaussian:
      case FamilyKind::ScaleMixtureGaussian:
        for (int c = r; c < p; ++c) row[c] = rng.normal();
        break;
      case FamilyKind::Rademacher:
        for (int c = r; c < p; ++c) row[c] = rng.rademacher();
        break;
      case FamilyKind::UniformSym:
        for (int c = r; c < p; ++c) row[c] = (2.0 * rng.uniform() - 1.0) * 1.7320508075688772;
        break;
    }
  }
  return x;
}

const char* family_name(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::Gaussian: return "gaussian";
    case FamilyKind::Rademacher: return "rademacher";
    case FamilyKind::UniformSym: return "uniform_sym";
    case FamilyKind::ScaleMixtureGaussian: return "scale_mixture_gaussian";
  }
  return "unknown";
}

} // namespace spikelab
