#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spikelab/mp.hpp"

namespace spikelab::quadrature {

// Which bulk-weighted integral to evaluate. The kernels mirror the m-function
// definitions; Normalization integrates the bare density.
enum class Kind { M1, M2, M3, M4, M5, M6, M7, M8, Normalization };

struct IntegrandSpec {
  Kind kind = Kind::Normalization;
  double alpha = 0.0;                      // unused for Normalization
  std::optional<double> alpha_prime = {};  // required exactly for M2, M7, M8
};

bool needs_alpha_prime(Kind kind);
const char* kind_name(Kind kind);

// Numerically integrate kernel(x) * density(x) over the bulk support with a
// Gauss-Legendre rule under the substitution x = mid + halfwidth*sin(u),
// which removes the square-root edge behavior (the transformed integrand is
// analytic) and never evaluates at the endpoints. Nodes double from 16 until
// two successive levels agree within rel_tol.
//
// Throws: std::invalid_argument for rel_tol outside (1e-14, 1e-2) or a
// malformed spec; TransitionWindow if a spike argument does not detach;
// NonConvergence if the node budget (4096) is exhausted.
double integrate_mp(const IntegrandSpec& spec, mp::AspectRatio gamma, double rel_tol = 1e-10);

// One row of the closed-form vs quadrature comparison table.
struct MomentEntry {
  Kind kind = Kind::Normalization;
  double alpha = 0.0;
  std::optional<double> alpha_prime;
  double closed = 0.0;
  double quad = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;
  bool flagged = false;       // entry could not be evaluated
  std::string flag_reason;    // e.g. a transition-window spike
};

struct MomentReport {
  std::vector<MomentEntry> entries;
  double rel_tol = 0.0;
  // Largest relative error over non-flagged entries (0 if none).
  double max_rel_err() const;
  bool any_flagged() const;
};

// Compare every closed-form m-function against quadrature over the alpha grid:
// all singles for m1/m3/m4/m5/m6, all ordered pairs for m2/m7/m8, plus one
// density-normalization row. Non-detaching grid entries are flagged, not fatal.
MomentReport verify_m_report(mp::AspectRatio gamma, const std::vector<double>& alphas,
                             double rel_tol = 1e-10);

} // namespace spikelab::quadrature
