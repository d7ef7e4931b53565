#pragma once

#include <cstdint>

#include "spikelab/bilinear.hpp"
#include "spikelab/model.hpp"
#include "spikelab/stats.hpp"

namespace spikelab::verify {

struct VerifyOptions {
  int replicates = 500;
  std::uint64_t master_seed = 1;
  double se_multiplier = 5.0;
  int workers = 1;
};

// Simulate under sim_config and test every limit statistic against the
// closed-form predictions of theory_config (normally the same config; a
// deliberately perturbed theory_config is the falsification control). Rows:
//   pack<j>.mean(sum_z)      theory 0,        bias band 2 sqrt(Var)/sqrt(n)
//   pack<j>.var(sum_z)       pack sum law,    bias band 3 sqrt(Var)/sqrt(n)
//   pack<j>.skew_z / kurt_z  moment z-scores vs 0 with unit SE (R >= 200)
//   cov(pack<j>,pack<j'>)    inter-pack law,  no band
// and, when every spike has multiplicity one:
//   pack<j>.var(vec[i])      eigenvector entry law, band 3 sqrt(Var)/sqrt(n)
//   pack<j>.median_cos       cos limit, band 5/n for the O(1/n) median bias
//   pack<j>.var(angle)       angle statistic law, band 3 sqrt(Var)/sqrt(n)
// Throws ShapeMismatch if the two configs disagree in pack structure.
stats::ComparisonReport run_verify(const ModelConfig& sim_config,
                                   const ModelConfig& theory_config,
                                   const VerifyOptions& opts = {});

// Monte Carlo check of the bilinear-form CLT: empirical mean (theory 0) and
// covariance of the Z vector against CltTheory.D entrywise at the SE
// multiplier, plus exact finite-n trace functionals of every resolvent matrix
// against their limits at 2% relative tolerance.
stats::ComparisonReport run_clt_verify(const bilinear::CltSpec& spec, double gamma_sq, int n,
                                       int replicates, std::uint64_t master_seed,
                                       double se_multiplier = 5.0);

// Wrap a decay scan as comparison rows: one informational row per grid point
// (median, no theory) and a final hard monotonicity verdict.
stats::ComparisonReport decay_comparison(const bilinear::DecayReport& report);

}  // namespace spikelab::verify
