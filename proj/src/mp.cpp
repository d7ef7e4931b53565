#include "spikelab/mp.hpp"

#include <cmath>
#include <stdexcept>

#include "spikelab/model.hpp"

namespace spikelab::mp {

namespace {

void require_valid_gamma(AspectRatio gamma) {
  if (!(gamma.gamma_sq > 1.0))
    throw std::invalid_argument("aspect ratio gamma_sq must exceed 1, got " +
                                std::to_string(gamma.gamma_sq));
}

// Detachment requires |alpha-1| > 1/gamma strictly; a tiny relative margin
// keeps the m-function denominators (alpha-1)^2 - 1/gamma^2 bounded away from
// zero. Pair denominators (alpha_j-1)(alpha_j'-1) - 1/gamma^2 then cannot
// vanish either: if both spikes detach, |(alpha_j-1)(alpha_j'-1)| > 1/gamma^2,
// and mixed above/below pairs make the product negative, never zero.
void require_detached(double alpha, AspectRatio gamma, const char* where) {
  require_valid_gamma(gamma);
  if (!(alpha > 0.0))
    throw std::invalid_argument(std::string(where) + ": spike alpha must be positive");
  const double t = std::fabs(alpha - 1.0) * std::sqrt(gamma.gamma_sq);
  if (t <= 1.0 + 1e-8) throw TransitionWindow(alpha, gamma.gamma_sq, where);
}

double inv_g2(AspectRatio gamma) { return 1.0 / gamma.gamma_sq; }

} // namespace

bool is_supercritical(SpikeClass c) {
  return c == SpikeClass::SupercriticalAbove || c == SpikeClass::SupercriticalBelow;
}

MpSea mp_support(AspectRatio gamma) {
  require_valid_gamma(gamma);
  const double gi = 1.0 / std::sqrt(gamma.gamma_sq);
  return {(1.0 - gi) * (1.0 - gi), (1.0 + gi) * (1.0 + gi)};
}

double mp_density(double lambda, AspectRatio gamma) {
  const MpSea sea = mp_support(gamma);
  if (lambda <= sea.lambda_minus || lambda >= sea.lambda_plus) return 0.0;
  const double rad = (sea.lambda_plus - lambda) * (lambda - sea.lambda_minus);
  return gamma.gamma_sq / (2.0 * 3.14159265358979323846 * lambda) * std::sqrt(rad);
}

SpikeClass classify_spike(double alpha, AspectRatio gamma) {
  require_valid_gamma(gamma);
  if (!(alpha > 0.0)) throw std::invalid_argument("classify_spike: alpha must be positive");
  const double gi = 1.0 / std::sqrt(gamma.gamma_sq);
  if (alpha > 1.0 + gi) return SpikeClass::SupercriticalAbove;
  if (alpha > 1.0) return SpikeClass::SubcriticalAbove;
  if (alpha >= 1.0 - gi) return SpikeClass::InsideWindowBelow;
  return SpikeClass::SupercriticalBelow;
}

double rho(double alpha, AspectRatio gamma) {
  require_detached(alpha, gamma, "rho");
  return alpha + alpha / (gamma.gamma_sq * (alpha - 1.0));
}

double m1(double alpha, AspectRatio gamma) {
  require_detached(alpha, gamma, "m1");
  return 1.0 / (alpha - 1.0);
}

double m2(double alpha, double alpha_prime, AspectRatio gamma) {
  require_detached(alpha, gamma, "m2");
  require_detached(alpha_prime, gamma, "m2");
  const double gi2 = inv_g2(gamma);
  const double a = alpha - 1.0, b = alpha_prime - 1.0;
  return (a * b + gi2 * alpha * alpha_prime - gi2) / (a * b * (a * b - gi2));
}

double m3(double alpha, AspectRatio gamma) {
  require_detached(alpha, gamma, "m3");
  const double a = alpha - 1.0;
  return 1.0 / (a * a - inv_g2(gamma));
}

double m4(double alpha, AspectRatio gamma) {
  require_detached(alpha, gamma, "m4");
  const double a = alpha - 1.0;
  const double den = a * a - inv_g2(gamma);
  return 2.0 * a * a * a / (den * den * den);
}

double m5(double alpha, AspectRatio gamma) {
  require_detached(alpha, gamma, "m5");
  const double gi2 = inv_g2(gamma);
  const double a = alpha - 1.0;
  return a * a / ((a + gi2) * (a + gi2) * (a * a - gi2));
}

double m6(double alpha, AspectRatio gamma) {
  require_detached(alpha, gamma, "m6");
  return 1.0 / (alpha - 1.0 + inv_g2(gamma));
}

double m7(double alpha, double alpha_prime, AspectRatio gamma) {
  require_detached(alpha, gamma, "m7");
  require_detached(alpha_prime, gamma, "m7");
  const double gi2 = inv_g2(gamma);
  const double a = alpha - 1.0, b = alpha_prime - 1.0;
  const double num =
      a * a * b * b * (a * b + gi2 * (alpha * alpha_prime + alpha + alpha_prime - 2.0) + gi2 * gi2);
  const double den = (a * a - gi2) * (b * b - gi2) * (a * b - gi2) * (a * b - gi2) * (a * b - gi2);
  return num / den;
}

double m8(double alpha, double alpha_prime, AspectRatio gamma) {
  require_detached(alpha, gamma, "m8");
  require_detached(alpha_prime, gamma, "m8");
  const double gi2 = inv_g2(gamma);
  const double a = alpha - 1.0, b = alpha_prime - 1.0;
  const double num = a * b * b + gi2 * b * (alpha * alpha_prime + alpha - 2.0) - gi2 * gi2;
  const double den = (a * b - gi2) * (a * b - gi2) * (b * b - gi2);
  return num / den;
}

double scaling(double alpha, AspectRatio gamma) {
  return 1.0 + inv_g2(gamma) * alpha * m3(alpha, gamma);
}

double omega_tilde(double alpha_j, double alpha_jp, AspectRatio gamma) {
  const double gi2 = inv_g2(gamma);
  return (1.0 + gi2 * m1(alpha_j, gamma)) * (1.0 + gi2 * m1(alpha_jp, gamma));
}

double theta_tilde(double alpha_j, double alpha_jp, AspectRatio gamma) {
  require_detached(alpha_j, gamma, "theta_tilde");
  require_detached(alpha_jp, gamma, "theta_tilde");
  const double gi2 = inv_g2(gamma);
  const double a = alpha_j - 1.0, b = alpha_jp - 1.0;
  return (a + gi2) * (b + gi2) / (a * b - gi2);
}

double zeta_tilde(double alpha_j, double alpha_jp, AspectRatio gamma) {
  const double gi2 = inv_g2(gamma);
  const double f = gi2 * m5(alpha_j, gamma) / ((1.0 - gi2 * m6(alpha_j, gamma)) * (1.0 - gi2 * m6(alpha_j, gamma)));
  const double fp = gi2 * m5(alpha_jp, gamma) / ((1.0 - gi2 * m6(alpha_jp, gamma)) * (1.0 - gi2 * m6(alpha_jp, gamma)));
  return f * fp;
}

double tau_tilde(double alpha_j, double alpha_jp, AspectRatio gamma) {
  return inv_g2(gamma) * m7(alpha_j, alpha_jp, gamma);
}

double kappa_tilde(double alpha_g, double alpha_h, AspectRatio gamma) {
  const double gi2 = inv_g2(gamma);
  const double denom = 1.0 - gi2 * m6(alpha_h, gamma);
  return (1.0 + gi2 * m1(alpha_g, gamma)) * gi2 * m5(alpha_h, gamma) / (denom * denom);
}

double mu_tilde(double alpha_g, double alpha_h, AspectRatio gamma) {
  const double gi2 = inv_g2(gamma);
  return gi2 * m3(alpha_h, gamma) + gi2 * m8(alpha_g, alpha_h, gamma);
}

std::vector<PackTheory> pack_theory(const ModelConfig& config) {
  const AspectRatio gamma{config.realized_gamma_sq()};
  std::vector<PackTheory> out;
  out.reserve(config.spikes.size());
  for (const auto& sp : config.spikes)
    out.push_back({sp.alpha, sp.multiplicity, rho(sp.alpha, gamma), scaling(sp.alpha, gamma)});
  return out;
}

int CovarianceTensor::index_of(const TensorIndex& ix) const {
  for (std::size_t k = 0; k < labels.size(); ++k)
    if (labels[k] == ix) return int(k);
  throw std::out_of_range("CovarianceTensor: unknown index");
}

double CovarianceTensor::at(const TensorIndex& a, const TensorIndex& b) const {
  return cov(index_of(a), index_of(b));
}

CovarianceTensor eigenvalue_cov(const ModelConfig& config) {
  const AspectRatio gamma{config.realized_gamma_sq()};
  const int q = int(config.spikes.size());
  if (q == 0) throw std::invalid_argument("eigenvalue_cov: config has no spikes");

  CovarianceTensor tensor;
  for (int j = 0; j < q; ++j) {
    const int m = config.spikes[j].multiplicity;
    for (int s = 0; s < m; ++s)
      for (int t = s; t < m; ++t) tensor.labels.push_back({j, s, t});
  }
  const int dim = int(tensor.labels.size());
  tensor.cov = Mat(dim, dim, 0.0);

  for (int a = 0; a < dim; ++a) {
    for (int b = a; b < dim; ++b) {
      const TensorIndex& A = tensor.labels[a];
      const TensorIndex& B = tensor.labels[b];
      const int j = A.pack, jp = B.pack;
      const double aj = config.spikes[j].alpha;
      const double ajp = config.spikes[jp].alpha;
      // global spike-block coordinates of the four entries
      const int gs = config.pack_offset(j) + A.s;
      const int gt = config.pack_offset(j) + A.t;
      const int gu = config.pack_offset(jp) + B.s;
      const int gv = config.pack_offset(jp) + B.t;
      const double e4 = fourth_moment(config, gs, gt, gu, gv);
      const double om = omega_tilde(aj, ajp, gamma);
      double val = om * (e4 - aj * ajp * ((A.s == A.t && B.s == B.t) ? 1.0 : 0.0));
      if (j == jp) {
        const double th = theta_tilde(aj, aj, gamma);
        const double extra = (A.s == B.s && A.t == B.t ? 1.0 : 0.0) +
                             (A.s == B.t && A.t == B.s ? 1.0 : 0.0);
        val += (th - om) * aj * aj * extra;
      }
      tensor.cov(a, b) = val;
      tensor.cov(b, a) = val;
    }
  }
  return tensor;
}

CovarianceTensor eigenvector_cov(const ModelConfig& config) {
  const AspectRatio gamma{config.realized_gamma_sq()};
  const int q = int(config.spikes.size());
  for (const auto& sp : config.spikes)
    if (sp.multiplicity != 1)
      throw std::invalid_argument("eigenvector_cov: repeated spike values (multiplicity > 1) "
                                  "are not covered by the eigenvector limit law");

  CovarianceTensor tensor;
  for (int j = 0; j < q; ++j)
    for (int i = 0; i < q; ++i) tensor.labels.push_back({j, i, -1});
  const int dim = q * q;
  tensor.cov = Mat(dim, dim, 0.0);

  for (int a = 0; a < dim; ++a) {
    for (int b = a; b < dim; ++b) {
      const int j = tensor.labels[a].pack, i = tensor.labels[a].s;
      const int jp = tensor.labels[b].pack, ip = tensor.labels[b].s;
      const double aj = config.spikes[j].alpha, ai = config.spikes[i].alpha;
      const double ajp = config.spikes[jp].alpha, aip = config.spikes[ip].alpha;
      const double e4 = fourth_moment(config, i, j, ip, jp);
      const double om = omega_tilde(aj, ajp, gamma);
      const double th = theta_tilde(aj, ajp, gamma);
      double val = om * (e4 - ai * aip * ((i == j && ip == jp) ? 1.0 : 0.0));
      const double extra = ((i == jp && j == ip) ? 1.0 : 0.0) + ((i == ip && j == jp) ? 1.0 : 0.0);
      val += (th - om) * ai * aj * extra;
      tensor.cov(a, b) = val;
      tensor.cov(b, a) = val;
    }
  }
  return tensor;
}

double vec_coefficient(const ModelConfig& config, int pack_j, int pack_i) {
  const int q = int(config.spikes.size());
  if (pack_j < 0 || pack_j >= q || pack_i < 0 || pack_i >= q)
    throw std::out_of_range("vec_coefficient: pack index out of range");
  if (pack_j == pack_i) throw std::invalid_argument("vec_coefficient: requires i != j");
  const AspectRatio gamma{config.realized_gamma_sq()};
  const double aj = config.spikes[pack_j].alpha;
  const double ai = config.spikes[pack_i].alpha;
  return aj / (rho(aj, gamma) * (aj - ai));
}

namespace {

// Shared assembly for the scalar (G_j, H_j) covariance components: the
// diagonal combines (pair, cross) constants exactly like the eigenvalue law,
// off-diagonal packs couple only through the fourth moment.
double angle_component_cov(const ModelConfig& config, int pack_a, int pack_b, double pair_const,
                           double cross_const) {
  const double aa = config.spikes[pack_a].alpha;
  const double ab = config.spikes[pack_b].alpha;
  const int ga = config.pack_offset(pack_a);
  const int gb = config.pack_offset(pack_b);
  const double e4 = fourth_moment(config, ga, ga, gb, gb);
  double val = pair_const * (e4 - aa * ab);
  if (pack_a == pack_b) val += 2.0 * (cross_const - pair_const) * aa * ab;
  return val;
}

void require_distinct_spikes(const ModelConfig& config, const char* where) {
  for (const auto& sp : config.spikes)
    if (sp.multiplicity != 1)
      throw std::invalid_argument(std::string(where) +
                                  ": requires distinct spikes (all multiplicities 1)");
}

} // namespace

double angle_g_cov(const ModelConfig& config, int pack_j, int pack_jp) {
  const AspectRatio gamma{config.realized_gamma_sq()};
  const double aj = config.spikes[pack_j].alpha, ajp = config.spikes[pack_jp].alpha;
  return angle_component_cov(config, pack_j, pack_jp, omega_tilde(aj, ajp, gamma),
                             theta_tilde(aj, ajp, gamma));
}

double angle_h_cov(const ModelConfig& config, int pack_j, int pack_jp) {
  const AspectRatio gamma{config.realized_gamma_sq()};
  const double aj = config.spikes[pack_j].alpha, ajp = config.spikes[pack_jp].alpha;
  return angle_component_cov(config, pack_j, pack_jp, zeta_tilde(aj, ajp, gamma),
                             tau_tilde(aj, ajp, gamma));
}

double angle_gh_cov(const ModelConfig& config, int pack_g, int pack_h) {
  const AspectRatio gamma{config.realized_gamma_sq()};
  const double ag = config.spikes[pack_g].alpha, ah = config.spikes[pack_h].alpha;
  return angle_component_cov(config, pack_g, pack_h, kappa_tilde(ag, ah, gamma),
                             mu_tilde(ag, ah, gamma));
}

AngleTheory angle_theory(const ModelConfig& config, int pack_j) {
  require_distinct_spikes(config, "angle_theory");
  if (pack_j < 0 || pack_j >= int(config.spikes.size()))
    throw std::out_of_range("angle_theory: pack index out of range");
  const AspectRatio gamma{config.realized_gamma_sq()};
  const double alpha = config.spikes[pack_j].alpha;
  const double s = scaling(alpha, gamma);

  AngleTheory th;
  th.cos_limit = 1.0 / std::sqrt(s);
  th.a_coeff = (1.0 / gamma.gamma_sq) * m4(alpha, gamma) * alpha / s;
  th.g_var = angle_g_cov(config, pack_j, pack_j);
  th.h_var = angle_h_cov(config, pack_j, pack_j);
  th.gh_cov = angle_gh_cov(config, pack_j, pack_j);
  th.t_var =
      (th.a_coeff * th.a_coeff * th.g_var - 2.0 * th.a_coeff * th.gh_cov + th.h_var) / 4.0;
  return th;
}

} // namespace spikelab::mp
