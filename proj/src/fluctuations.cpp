#include "spikelab/fluctuations.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "spikelab/mp.hpp"
#include "spikelab/rng.hpp"

namespace spikelab::fluctuations {

ReplicateStats extract(const ModelConfig& config, const eigen::ExtremeSpectrum& spectrum) {
  const int r_plus = config.r_plus();
  const int r_minus = config.r_minus();
  const int r = config.r();
  const double sqrt_n = std::sqrt((double)config.n);
  const mp::AspectRatio gamma{config.realized_gamma_sq()};
  const mp::MpSea sea = mp::mp_support(gamma);

  if ((int)spectrum.top.size() < r_plus || (int)spectrum.bottom.size() < r_minus)
    throw ShapeMismatch("extract: spectrum holds fewer extremes than the config has spikes");
  for (int i = 0; i < r_plus; ++i)
    if (spectrum.top[i].value <= sea.lambda_plus)
      throw PackMismatch("top eigenvalue " + std::to_string(spectrum.top[i].value) +
                         " inside the bulk (lambda_plus=" + std::to_string(sea.lambda_plus) + ")");
  for (int i = 0; i < r_minus; ++i)
    if (spectrum.bottom[i].value >= sea.lambda_minus)
      throw PackMismatch("bottom eigenvalue " + std::to_string(spectrum.bottom[i].value) +
                         " inside the bulk (lambda_minus=" + std::to_string(sea.lambda_minus) +
                         ")");

  const eigen::OrientedSpectrum oriented =
      eigen::oriented_extremes(spectrum, r_plus, r_minus, r);

  ReplicateStats out;
  const int q = (int)config.spikes.size();
  bool all_single = true;
  for (const auto& s : config.spikes) all_single = all_single && (s.multiplicity == 1);

  // Ascending start position of each below-one pack in the bottom list: the
  // smallest alpha (latest in config order) owns the very smallest eigenvalues.
  std::vector<int> bottom_start(q, 0);
  {
    int pos = 0;
    for (int j = q - 1; j >= 0; --j) {
      if (config.spikes[j].alpha < 1.0) {
        bottom_start[j] = pos;
        pos += config.spikes[j].multiplicity;
      }
    }
  }

  int top_pos = 0;
  for (int j = 0; j < q; ++j) {
    const SpikeSpec& spike = config.spikes[j];
    const double rho_j = mp::rho(spike.alpha, gamma);
    PackFluct pf;
    pf.pack = j;
    pf.z.resize(spike.multiplicity);
    if (spike.alpha > 1.0) {
      for (int s = 0; s < spike.multiplicity; ++s)
        pf.z[s] = sqrt_n * (oriented.top[top_pos + s].value - rho_j);
      top_pos += spike.multiplicity;
    } else {
      // Members ascending from bottom_start; reverse for descending z.
      for (int s = 0; s < spike.multiplicity; ++s) {
        const auto& member = oriented.bottom[bottom_start[j] + spike.multiplicity - 1 - s];
        pf.z[s] = sqrt_n * (member.value - rho_j);
      }
    }
    out.packs.push_back(std::move(pf));

    if (all_single) {
      const eigen::OrientedPair& o =
          (spike.alpha > 1.0) ? oriented.top[j] : oriented.bottom[r - 1 - j];
      VecFluct vf;
      vf.pack = j;
      for (int i = 0; i < r; ++i) {
        if (i == j) continue;
        vf.coords.push_back(i);
        vf.entries.push_back(sqrt_n * o.u_hat[i]);
      }
      vf.residual = (double)config.n * (1.0 - o.u_hat[j]);
      out.vecs.push_back(std::move(vf));

      const double s_j = mp::scaling(spike.alpha, gamma);
      AngleFluct af;
      af.pack = j;
      af.statistic =
          std::pow(s_j, 1.5) * sqrt_n * (o.cos_theta - 1.0 / std::sqrt(s_j));
      out.angles.push_back(af);
    }
  }
  return out;
}

Ensemble run_ensemble(const ModelConfig& config, int replicates, std::uint64_t master_seed,
                      int workers) {
  if (replicates < 1) throw std::invalid_argument("run_ensemble: replicates must be >= 1");
  {
    const auto issues = validate(config);
    if (has_errors(issues)) {
      std::string msg = "run_ensemble: invalid config:";
      for (const auto& i : issues)
        if (i.is_error) msg += " " + i.message + ";";
      throw std::invalid_argument(msg);
    }
  }
  const int r_plus = config.r_plus();
  const int r_minus = config.r_minus();

  struct Slot {
    bool ok = false;
    bool flagged = false;
    ReplicateStats stats;
    std::string reason;
  };
  std::vector<Slot> slots(replicates);

  std::atomic<int> next{0};
  std::mutex fail_mutex;
  std::exception_ptr failure;
  int failure_replicate = replicates;

  auto work = [&]() {
    for (;;) {
      const int k = next.fetch_add(1);
      if (k >= replicates) return;
      const std::uint64_t seed = Rng::stream_seed(master_seed, (std::uint64_t)k);
      try {
        const Mat x = sample_data(config, seed);
        const Mat s = eigen::sample_covariance(x);
        const eigen::ExtremeSpectrum spectrum = eigen::extreme_eig(s, r_plus, r_minus);
        ReplicateStats stats = extract(config, spectrum);
        stats.replicate = k;
        stats.seed = seed;
        slots[k].stats = std::move(stats);
        slots[k].ok = true;
      } catch (const PackMismatch& ex) {
        slots[k].flagged = true;
        slots[k].reason = ex.what();
      } catch (const DegenerateProjection& ex) {
        slots[k].flagged = true;
        slots[k].reason = ex.what();
      } catch (...) {
        // Keep the failure from the smallest replicate index so the thrown
        // error does not depend on worker scheduling.
        std::lock_guard<std::mutex> lock(fail_mutex);
        if (k < failure_replicate) {
          failure_replicate = k;
          failure = std::current_exception();
        }
        return;
      }
    }
  };

  const int nworkers = std::max(1, std::min(workers, replicates));
  if (nworkers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nworkers);
    for (int w = 0; w < nworkers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  Ensemble out;
  out.replicates = replicates;
  for (int k = 0; k < replicates; ++k) {
    if (slots[k].ok)
      out.stats.push_back(std::move(slots[k].stats));
    else if (slots[k].flagged)
      out.flagged.emplace_back(k, slots[k].reason);
  }
  if ((double)out.flagged.size() > 0.01 * replicates)
    throw std::runtime_error("run_ensemble: " + std::to_string(out.flagged.size()) + " of " +
                             std::to_string(replicates) +
                             " replicates flagged (>1%); first: " + out.flagged.front().second);
  return out;
}

}  // namespace spikelab::fluctuations
