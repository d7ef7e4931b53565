#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spikelab/linalg.hpp"
#include "spikelab/mp.hpp"

namespace spikelab::bilinear {

// Test matrices for the bilinear form CLT. The resolvent kinds are built from
// an independent n x p Gaussian noise matrix U/sqrt(n) = W-basis with Gram
// spectrum d_1..d_p and shift lambda = rho_alpha evaluated at the realized
// aspect ratio:
//   ResolventA(alpha):  A = I_n + U (lambda I - G)^{-1} U^T,  G = U^T U
//   ResolventC(alpha):  C = U (lambda I - G)^{-2} U^T
// SymmetricBanded is the Toeplitz band with profile (c_0 .. c_b).
enum class MatrixKind { Identity, SymmetricBanded, ResolventA, ResolventC };
std::string kind_name(MatrixKind kind);

struct MatrixSpec {
  MatrixKind kind = MatrixKind::Identity;
  double alpha = 4.0;  // resolvent kinds only: spike location of the shift
  Vec profile;         // banded only: c_0 .. c_b
};

// Joint law of the vector pair (x, y) with iid coordinate pairs,
// E x_s = E y_s = 0 and unit variances. Shared laws set y = x.
enum class VectorLawKind {
  SharedGaussian,
  IndependentGaussian,
  SharedRademacher,
  SharedUniformSym
};
std::string law_name(VectorLawKind kind);

struct VectorLaw {
  VectorLawKind kind = VectorLawKind::SharedGaussian;
  double rho() const;    // E[x_s y_s]
  double exxyy() const;  // E[x_s^2 y_s^2]
};

struct CltSpec {
  std::vector<MatrixSpec> matrices;
  VectorLaw law;
};

// Limiting trace functionals of a matrix pair:
//   omega = lim (1/N) sum_s a_ss a'_ss      (diagonal product)
//   theta = lim (1/N) tr(A A')              (full product)
struct TraceLimits {
  double omega = 0.0;
  double theta = 0.0;
};
TraceLimits pair_limits(const MatrixSpec& l, const MatrixSpec& lp, mp::AspectRatio gamma);

// Limiting covariance of the centered statistics Z(l) = (x^T A_l y - rho tr A_l)/sqrt(N):
//   D = d1 * Omega + d2 * (Theta - Omega)
// with d1 = E[x^2 y^2] - rho^2 and d2 = rho^2 + 1.
struct CltTheory {
  Mat omega;
  Mat theta;
  Mat d;
  double d1 = 0.0;
  double d2 = 0.0;
};
CltTheory clt_theory(const CltSpec& spec, mp::AspectRatio gamma);

// Holds one frozen noise matrix (for the resolvent kinds) and produces the
// vector of centered bilinear statistics for replicate k as a pure function
// of (master_seed, k). All finite-n traces are exact, computed in the noise
// eigenbasis.
class CltHarness {
 public:
  CltHarness(CltSpec spec, double gamma_sq, int n, std::uint64_t noise_seed);

  int n() const { return n_; }
  int p() const { return p_; }
  const CltSpec& spec() const { return spec_; }
  double realized_gamma_sq() const;
  double lambda(int l) const;  // resolvent shift of matrix l (0 otherwise)

  // Z vector for replicate k; deterministic in (master_seed, k).
  Vec sample(std::uint64_t master_seed, std::uint64_t k) const;

  // Exact finite-n trace functionals (empirical counterparts of pair_limits).
  TraceLimits trace_limits(int l) const { return trace_limits_pair(l, l); }
  TraceLimits trace_limits_pair(int l, int lp) const;

  // Maximum absolute entry of matrix l. Exact for Identity, banded, and any
  // definite resolvent part (the diagonal dominates a definite matrix); for a
  // below-sea ResolventA it is the Cauchy-Schwarz upper bound.
  double entry_bound(int l) const;

  // Noise eigenstructure, exposed for dense cross-checks in tests.
  const Vec& gram_eigenvalues() const { return d_; }
  const Mat& w_basis() const { return w_; }
  Vec resolvent_weights(int l) const;  // 1/(lambda-d) for A, 1/(lambda-d)^2 for C

 private:
  CltSpec spec_;
  int n_ = 0;
  int p_ = 0;   // 0 when no resolvent kind is present
  Vec d_;       // Gram eigenvalues, ascending
  Mat w_;       // n x p orthonormal-column basis U V
  Vec lambda_;  // per matrix (0 for non-resolvent)
  std::vector<Vec> diag_;  // per matrix: exact diagonal
  Vec trace_;              // per matrix: exact trace
};

// One-shot statistic vector: builds a harness with noise_seed = seed and
// draws replicate 0 of a derived vector stream.
Vec sample_statistic(const CltSpec& spec, double gamma_sq, int n, std::uint64_t seed);

// Empirical (omega, theta) of a single matrix against itself at finite n.
// Requires n >= 200 so the noise spectrum fills its support.
TraceLimits empirical_trace_limits(const MatrixSpec& spec, double gamma_sq, int n,
                                   std::uint64_t seed = 0x5EED0001ull);

// Remainder decay scan: the median over replicates of
//   n^{kappa-1} |x^T A y - rho tr A| = n^{kappa-1/2} |Z|
// for each n in the grid; kappa in (0, 1/2) makes the medians shrink.
struct DecayRow {
  int n = 0;
  double median_value = 0.0;
};
struct DecayReport {
  std::vector<DecayRow> rows;
  double kappa = 0.0;
  bool monotone_decreasing = false;
};
DecayReport decay_check(const MatrixSpec& matrix, const VectorLaw& law, double gamma_sq,
                        double kappa, const std::vector<int>& n_grid, int replicates,
                        std::uint64_t master_seed);

}  // namespace spikelab::bilinear
