#pragma once

#include <vector>

#include "spikelab/errors.hpp"
#include "spikelab/linalg.hpp"

namespace spikelab::eigen {

struct EigenPair {
  double value = 0.0;
  Vec vector;  // unit norm
};

// Raw extreme eigenpairs of one symmetric matrix.
struct ExtremeSpectrum {
  std::vector<EigenPair> top;     // descending
  std::vector<EigenPair> bottom;  // ascending
  double bulk_min = 0.0;          // range of the remaining (non-extracted) spectrum
  double bulk_max = 0.0;
  Vec all_values;                 // every eigenvalue, descending
};

// One extreme eigenvector split against the spike block (the first r
// coordinates) and oriented by its assigned population coordinate.
struct OrientedPair {
  double value = 0.0;
  Vec vector;              // unit eigenvector w, sign fixed so w[coord] >= 0
  Vec u_hat;               // first r coordinates of w, divided by ||w_u||
  Vec v_hat;               // remaining coordinates of w, divided by ||w_u||
  double cos_theta = 0.0;  // u_hat[coord]/sqrt(1+||v_hat||^2) = w[coord] after orientation
  int coord = 0;           // assigned population coordinate, 0-based
};

struct OrientedSpectrum {
  std::vector<OrientedPair> top;     // descending
  std::vector<OrientedPair> bottom;  // ascending
  double bulk_min = 0.0;
  double bulk_max = 0.0;
};

// Householder reduction to tridiagonal form, reflectors retained so Q can be
// applied to vectors (cheap back-transform) or densified.
struct Tridiagonal {
  Vec d;  // diagonal, size p
  Vec e;  // e[k] couples (k, k+1); size p with a zero pad at the end
  Mat v;  // reflector for step i lives in row i, elements 0..i-1 (i = 2..p-1)
  Vec h;  // h[i] = v_i^T v_i / 2; zero marks a skipped step
};

// X^T X / n. Requires more rows than columns (tall data matrix).
Mat sample_covariance(const Mat& x);

Tridiagonal tridiagonalize(Mat a);           // consumes its argument
void apply_q(const Tridiagonal& t, Vec& w);  // w <- Q w, where Q^T A Q = T
Mat accumulate_q(const Tridiagonal& t);      // dense Q

// Implicit-shift QL for a symmetric tridiagonal matrix. On return d holds the
// eigenvalues (unordered) and e is destroyed. If z is non-null its columns are
// rotated along: start from Q (or the identity) to obtain eigenvectors of the
// original dense (or tridiagonal) matrix. Throws NonConvergence if any
// eigenvalue fails to deflate within the sweep budget.
void tqli(Vec& d, Vec& e, Mat* z);

// Full decomposition, pairs sorted by descending eigenvalue. When tol > 0 the
// residual ||S V - V diag||_F <= tol * ||S||_F is verified (NonConvergence on
// failure). Ties are broken by the vector's first significant coordinate.
std::vector<EigenPair> full_symmetric_eig(const Mat& s, double tol = 1e-8);

// All eigenvalues via QL, but eigenvectors only for the k_top largest and
// k_bottom smallest (tridiagonal inverse iteration + reflector back-transform).
// Requires k_top + k_bottom < p. An order of magnitude cheaper than the full
// decomposition when only the detached extremes are needed.
ExtremeSpectrum extreme_eig(const Mat& s, int k_top, int k_bottom);

// Same shape of result taken from an existing full decomposition.
ExtremeSpectrum extremes_from_full(const std::vector<EigenPair>& pairs, int k_top, int k_bottom);

// Split and orient each extreme vector per the sign convention: the population
// coordinate for top[i] is i, for bottom[i] (ascending) it is r-1-i. Throws
// DegenerateProjection when ||w_u|| < 1e-6 for any extreme pair.
OrientedSpectrum oriented_extremes(const ExtremeSpectrum& spectrum, int r_plus, int r_minus,
                                   int r);

Vec eigenvalues(const Mat& s);  // descending, values-only path
double min_eigenvalue(const Mat& s);

}  // namespace spikelab::eigen
