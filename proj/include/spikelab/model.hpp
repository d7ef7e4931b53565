#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "spikelab/linalg.hpp"

namespace spikelab {

// Distribution family of the spike-block coordinates. All families have mean
// zero and unit variance per coordinate before the sqrt(alpha) spike scaling,
// and finite fourth moment. For Gaussian / Rademacher / UniformSym the same
// family also fills the noise block; ScaleMixtureGaussian applies only to the
// spike block (one shared radial factor per row) while the noise block stays
// standard Gaussian.
enum class FamilyKind { Gaussian, Rademacher, UniformSym, ScaleMixtureGaussian };

// Two-point law of the squared radial factor r^2 for ScaleMixtureGaussian.
// Constraint: E r^2 = 1 (unit variance preserved); E r^4 > 1 is what creates
// dependence (not correlation) across spike coordinates in one row.
struct MixtureParam {
  double r_sq_a = 0.5;
  double r_sq_b = 2.5;
  double weight_a = 0.75; // P(r^2 = r_sq_a); weight_b = 1 - weight_a
  double e_r2() const { return weight_a * r_sq_a + (1.0 - weight_a) * r_sq_b; }
  double e_r4() const { return weight_a * r_sq_a * r_sq_a + (1.0 - weight_a) * r_sq_b * r_sq_b; }
};

struct DistributionFamily {
  FamilyKind kind = FamilyKind::Gaussian;
  MixtureParam mixture; // used only for ScaleMixtureGaussian

  // E w^4 of one (unscaled) spike coordinate.
  double marginal_fourth() const;
  // E[w_i^2 w_j^2] for distinct spike coordinates i != j in the same row.
  double cross_fourth() const;
};

struct SpikeSpec {
  double alpha = 0.0;
  int multiplicity = 1;
};

struct ModelConfig {
  std::vector<SpikeSpec> spikes; // distinct alphas, strictly decreasing
  double gamma_sq = 0.0;         // limit n/p, must exceed 1
  int n = 0;                     // sample count (rows)
  DistributionFamily family;

  int p() const { return int(std::llround(double(n) / gamma_sq)); }
  int r() const; // total spike count (with multiplicity)
  int r_plus() const;  // spikes with alpha > 1
  int r_minus() const; // spikes with alpha < 1
  double realized_gamma_sq() const { return double(n) / double(p()); }
  // First spike-block column of pack j (0-based over config order).
  int pack_offset(int pack) const;
};

struct ValidationIssue {
  bool is_error = false; // false -> warning
  std::string message;
};

// Errors and warnings as data, never thrown: callers decide severity.
std::vector<ValidationIssue> validate(const ModelConfig& config);
bool has_errors(const std::vector<ValidationIssue>& issues);

// n x p data matrix: r spike columns (config order, multiplicities expanded)
// followed by p-r noise columns. Pure function of (config, seed).
Mat sample_data(const ModelConfig& config, std::uint64_t seed);

// Analytic E[xi_i xi_j xi_k xi_l] over spike-block coordinates (0-based,
// 0 <= index < r). Permutation-invariant by construction.
double fourth_moment(const ModelConfig& config, int i, int j, int k, int l);

// Spike variance of spike-block coordinate i (the expanded alpha).
double coordinate_alpha(const ModelConfig& config, int i);

// One row of the spike block (length r), used by sampling and by the
// moment-convergence tests; exposed so distribution properties can be checked
// on many draws without materializing full data matrices.
void sample_xi_row(const ModelConfig& config, class Rng& rng, double* out);

const char* family_name(FamilyKind kind);

} // namespace spikelab
