#pragma once

#include <string>
#include <vector>

#include "spikelab/errors.hpp"
#include "spikelab/linalg.hpp"

namespace spikelab {

struct ModelConfig;

namespace mp {

// Limit aspect ratio n/p; the model requires gamma_sq > 1 (more samples than
// dimensions), so the bulk density has no point mass at zero.
struct AspectRatio {
  double gamma_sq = 0.0;
};

// Support of the bulk spectral law: [lambda_minus, lambda_plus].
struct MpSea {
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;
};

// Position of a spike alpha relative to the critical window [1-1/gamma, 1+1/gamma].
// Only supercritical spikes (strictly outside the window) detach from the bulk.
enum class SpikeClass { SupercriticalAbove, SubcriticalAbove, InsideWindowBelow, SupercriticalBelow };

bool is_supercritical(SpikeClass c);

MpSea mp_support(AspectRatio gamma);                     // throws std::invalid_argument if gamma_sq <= 1
double mp_density(double lambda, AspectRatio gamma);     // bulk density, zero off support
SpikeClass classify_spike(double alpha, AspectRatio gamma);

// Almost-sure limit of a detached sample eigenvalue: rho = alpha + alpha/(gamma_sq*(alpha-1)).
// Throws TransitionWindow for non-detaching spikes.
double rho(double alpha, AspectRatio gamma);

// The m-functions: bulk-weighted resolvent moments with closed forms.
//   m1 = int x/(rho-x) dF        m5 = int 1/(rho-x)^2 dF
//   m2 = int x^2/((rho-x)(rho'-x)) dF
//   m3 = int x/(rho-x)^2 dF      m6 = int 1/(rho-x) dF
//   m4 = int 2x/(rho-x)^3 dF     m7 = int x^2/((rho-x)^2(rho'-x)^2) dF
//                                m8 = int x^2/((rho-x)(rho'-x)^2) dF
// All arguments are spike values alpha (the rho's are derived internally);
// every function throws TransitionWindow when a spike does not detach.
double m1(double alpha, AspectRatio gamma);
double m2(double alpha, double alpha_prime, AspectRatio gamma);
double m3(double alpha, AspectRatio gamma);
double m4(double alpha, AspectRatio gamma);
double m5(double alpha, AspectRatio gamma);
double m6(double alpha, AspectRatio gamma);
double m7(double alpha, double alpha_prime, AspectRatio gamma);
double m8(double alpha, double alpha_prime, AspectRatio gamma);

// Scaling factor of the eigenvalue fluctuation: s = 1 + gamma^{-2} alpha m3(rho_alpha).
double scaling(double alpha, AspectRatio gamma);

// Covariance constants of the limit laws. omega/theta/zeta/tau are symmetric
// in (alpha_j, alpha_j'); kappa/mu are not: their first argument is the
// eigenvalue-side (G) spike and the second the curvature-side (H) spike.
double omega_tilde(double alpha_j, double alpha_jp, AspectRatio gamma);
double theta_tilde(double alpha_j, double alpha_jp, AspectRatio gamma);
double zeta_tilde(double alpha_j, double alpha_jp, AspectRatio gamma);
double tau_tilde(double alpha_j, double alpha_jp, AspectRatio gamma);
double kappa_tilde(double alpha_g, double alpha_h, AspectRatio gamma);
double mu_tilde(double alpha_g, double alpha_h, AspectRatio gamma);

// Per-pack limit data, evaluated at the config's realized aspect ratio n/p.
struct PackTheory {
  double alpha = 0.0;
  int multiplicity = 1;
  double rho = 0.0;
  double scaling = 0.0;
};
std::vector<PackTheory> pack_theory(const ModelConfig& config);

// A labeled symmetric covariance matrix over tensor indices. Eigenvalue law:
// labels are (pack j, s, t) with s <= t, the Gaussian-matrix entries G^{(j)}_{st}.
// Eigenvector law: labels are (pack j, entry i) stored as (j, i, -1).
struct TensorIndex {
  int pack = 0;
  int s = 0;
  int t = 0;
  bool operator==(const TensorIndex& o) const { return pack == o.pack && s == o.s && t == o.t; }
};

struct CovarianceTensor {
  std::vector<TensorIndex> labels;
  Mat cov; // labels.size() x labels.size(), symmetric
  int index_of(const TensorIndex& ix) const;
  double at(const TensorIndex& a, const TensorIndex& b) const;
};

// Joint covariance of the pack-fluctuation Gaussian matrices G^{(j)}_{st}
// (s <= t within each pack), using the model's analytic fourth moments.
CovarianceTensor eigenvalue_cov(const ModelConfig& config);

// Joint covariance of the eigenvector-fluctuation Gaussians G^{(j)}_i over
// packs j and entries i (requires all spikes distinct, i.e. multiplicity 1).
CovarianceTensor eigenvector_cov(const ModelConfig& config);

// Deterministic coefficient c_{j,i} in sqrt(N) u_hat^{(j)}_i -> c_{j,i} G^{(j)}_i
// for i != j: c = alpha_j / (rho_j (alpha_j - alpha_i)). Indices are pack
// positions in config order (0-based); requires distinct spikes.
double vec_coefficient(const ModelConfig& config, int pack_j, int pack_i);

// Limit theory for the angle between a sample spike eigenvector and its
// population axis e_j. cos_limit = 1/sqrt(scaling); the centered statistic
// T = scaling^{3/2} sqrt(N) (cos theta_hat - cos_limit) converges to
// (a G_j - H_j)/2 with a = gamma^{-2} m4(rho_j) alpha_j / scaling and the
// (G, H) covariance assembled from the model's fourth moments.
struct AngleTheory {
  double cos_limit = 0.0;
  double a_coeff = 0.0;
  double g_var = 0.0;
  double h_var = 0.0;
  double gh_cov = 0.0;
  double t_var = 0.0; // (a^2 g_var - 2 a gh_cov + h_var) / 4
};
AngleTheory angle_theory(const ModelConfig& config, int pack_j);

// Cross-pack covariance components of the angle limit (j != j' allowed):
//   Cov(G_j, G_j'), Cov(H_j, H_j'), and Cov(G_jg, H_jh) (order-sensitive).
double angle_g_cov(const ModelConfig& config, int pack_j, int pack_jp);
double angle_h_cov(const ModelConfig& config, int pack_j, int pack_jp);
double angle_gh_cov(const ModelConfig& config, int pack_g, int pack_h);

} // namespace mp
} // namespace spikelab
