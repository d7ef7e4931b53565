#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spikelab/eigen.hpp"
#include "spikelab/model.hpp"

namespace spikelab::fluctuations {

// Pack eigenvalue fluctuations: z_s = sqrt(N) (lambda_hat - rho_alpha) for the
// pack's sample eigenvalues, stored as descending order statistics.
struct PackFluct {
  int pack = 0;
  Vec z;
};

// Eigenvector fluctuations of pack j (only defined when every spike has
// multiplicity one): entries are sqrt(N) u_hat_i for each other spike
// coordinate i != j, and the consistency residual N (1 - u_hat_j) >= 0.
struct VecFluct {
  int pack = 0;
  std::vector<int> coords;  // population coordinate i for each entry
  Vec entries;
  double residual = 0.0;
};

// Centered and scaled angle statistic scaling^{3/2} sqrt(N) (cos - cos_limit).
struct AngleFluct {
  int pack = 0;
  double statistic = 0.0;
};

struct ReplicateStats {
  int replicate = 0;
  std::uint64_t seed = 0;
  std::vector<PackFluct> packs;
  std::vector<VecFluct> vecs;
  std::vector<AngleFluct> angles;
};

// Extract every limit statistic from one decomposed replicate. All centering
// constants (rho, scaling, cos_limit, bulk edges) are evaluated at the
// realized aspect ratio n/p. Pack membership is positional: packs with
// alpha > 1 consume the top eigenvalues in config order, packs with alpha < 1
// consume the smallest eigenvalues with the smallest alpha owning the very
// smallest ones. Throws PackMismatch when an extreme eigenvalue fails to
// detach from the bulk support, DegenerateProjection via the orientation step.
ReplicateStats extract(const ModelConfig& config, const eigen::ExtremeSpectrum& spectrum);

struct Ensemble {
  std::vector<ReplicateStats> stats;                 // ascending replicate order
  std::vector<std::pair<int, std::string>> flagged;  // (replicate, reason)
  int replicates = 0;                                // requested count
};

// Monte Carlo ensemble. Replicate k is a pure function of (config, master_seed,
// k): its data matrix uses the RNG stream derived from (master_seed, k), so
// results are reproducible and independent of worker count or compute order.
// Flagged replicates (detachment failure, degenerate projection) are dropped
// and reported; more than 1% flagged aborts with std::runtime_error.
Ensemble run_ensemble(const ModelConfig& config, int replicates, std::uint64_t master_seed,
                      int workers = 1);

}  // namespace spikelab::fluctuations
