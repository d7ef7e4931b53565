#include <cmath>
#include <vector>

#include "doctest.h"
#include "spikelab/eigen.hpp"
#include "spikelab/errors.hpp"
#include "spikelab/model.hpp"
#include "spikelab/mp.hpp"

using namespace spikelab;
using mp::AspectRatio;

namespace {

const double kGammaGrid[] = {2.0, 4.0, 9.0};
const double kAlphaGrid[] = {4.0, 2.5, 0.2, 0.1};

ModelConfig two_spike_config(double a0, double a1, double gamma_sq, int n,
                             FamilyKind kind = FamilyKind::Gaussian) {
  ModelConfig c;
  c.spikes = {{a0, 1}, {a1, 1}};
  c.gamma_sq = gamma_sq;
  c.n = n;
  c.family.kind = kind;
  return c;
}

}  // namespace

TEST_CASE("bulk support and density") {
  const AspectRatio g{4.0};
  const auto sea = mp::mp_support(g);
  CHECK(sea.lambda_minus == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(sea.lambda_plus == doctest::Approx(2.25).epsilon(1e-14));

  CHECK(mp::mp_density(0.2, g) == 0.0);
  CHECK(mp::mp_density(2.3, g) == 0.0);
  CHECK(mp::mp_density(1.0, g) > 0.0);
  // closed form at an interior point
  const double expected = 4.0 / (2.0 * M_PI * 1.0) * std::sqrt((2.25 - 1.0) * (1.0 - 0.25));
  CHECK(mp::mp_density(1.0, g) == doctest::Approx(expected).epsilon(1e-14));

  CHECK_THROWS_AS(mp::mp_support(AspectRatio{1.0}), std::invalid_argument);
  CHECK_THROWS_AS(mp::mp_support(AspectRatio{0.5}), std::invalid_argument);
}

TEST_CASE("spike classification against the critical window") {
  const AspectRatio g{4.0};  // window [0.5, 1.5]
  CHECK(mp::classify_spike(4.0, g) == mp::SpikeClass::SupercriticalAbove);
  CHECK(mp::classify_spike(1.4, g) == mp::SpikeClass::SubcriticalAbove);
  CHECK(mp::classify_spike(0.7, g) == mp::SpikeClass::InsideWindowBelow);
  CHECK(mp::classify_spike(0.2, g) == mp::SpikeClass::SupercriticalBelow);
  // the boundary itself does not detach
  CHECK_FALSE(mp::is_supercritical(mp::classify_spike(1.5, g)));
  CHECK_FALSE(mp::is_supercritical(mp::classify_spike(0.5, g)));
  CHECK(mp::is_supercritical(mp::SpikeClass::SupercriticalAbove));
  CHECK(mp::is_supercritical(mp::SpikeClass::SupercriticalBelow));
  CHECK_FALSE(mp::is_supercritical(mp::SpikeClass::SubcriticalAbove));
}

TEST_CASE("detached eigenvalue locations") {
  const AspectRatio g{4.0};
  CHECK(mp::rho(4.0, g) == doctest::Approx(13.0 / 3.0).epsilon(1e-14));
  CHECK(mp::rho(0.2, g) == doctest::Approx(0.1375).epsilon(1e-14));
  // detached values sit strictly outside the bulk
  const auto sea = mp::mp_support(g);
  CHECK(mp::rho(4.0, g) > sea.lambda_plus);
  CHECK(mp::rho(0.2, g) < sea.lambda_minus);
  CHECK(mp::rho(0.2, g) > 0.0);

  CHECK_THROWS_AS(mp::rho(1.2, g), TransitionWindow);
  CHECK_THROWS_AS(mp::rho(1.5, g), TransitionWindow);
  CHECK_THROWS_AS(mp::m1(1.2, g), TransitionWindow);
  CHECK_THROWS_AS(mp::m3(0.6, g), TransitionWindow);
  CHECK_THROWS_AS(mp::m2(4.0, 1.2, g), TransitionWindow);
  CHECK_THROWS_AS(mp::m7(1.2, 4.0, g), TransitionWindow);
}

// Structural identities tying the independent closed forms together. Each one
// relates functions with different derivations, so agreement to near machine
// precision is strong evidence against transcription slips.
TEST_CASE("closed-form cross identities on the full grid") {
  for (double gamma_sq : kGammaGrid) {
    const AspectRatio g{gamma_sq};
    const double inv = 1.0 / gamma_sq;
    for (double alpha : kAlphaGrid) {
      CAPTURE(gamma_sq);
      CAPTURE(alpha);

      // rho = (1 + gamma^{-2} m1) alpha
      const double rho = mp::rho(alpha, g);
      CHECK(std::fabs((1.0 + inv * mp::m1(alpha, g)) * alpha / rho - 1.0) < 1e-12);

      // scaling = 1 + gamma^{-2} alpha m3
      const double s = mp::scaling(alpha, g);
      CHECK(std::fabs((1.0 + inv * alpha * mp::m3(alpha, g)) / s - 1.0) < 1e-12);

      // squared-cosine limit: 1/s = (1 - gamma^{-2}/(alpha-1)^2) / (1 + gamma^{-2}/(alpha-1))
      const double a = alpha - 1.0;
      const double cos_sq = (1.0 - inv / (a * a)) / (1.0 + inv / a);
      CHECK(std::fabs(cos_sq * s - 1.0) < 1e-12);

      // m5 / (1 - gamma^{-2} m6)^2 = m3 (resolvent differentiation identity)
      const double denom = 1.0 - inv * mp::m6(alpha, g);
      CHECK(std::fabs(mp::m5(alpha, g) / (denom * denom) / mp::m3(alpha, g) - 1.0) < 1e-12);

      for (double alpha_p : kAlphaGrid) {
        // theta = 1 + gamma^{-2}(m1 + m1' + m2)
        const double theta = mp::theta_tilde(alpha, alpha_p, g);
        const double via_m =
            1.0 + inv * (mp::m1(alpha, g) + mp::m1(alpha_p, g) + mp::m2(alpha, alpha_p, g));
        CHECK(std::fabs(via_m / theta - 1.0) < 1e-12);

        // kappa factorizes through the same differentiation identity
        const double kappa = mp::kappa_tilde(alpha, alpha_p, g);
        const double via_m3 = (1.0 + inv * mp::m1(alpha, g)) * inv * mp::m3(alpha_p, g);
        CHECK(std::fabs(via_m3 / kappa - 1.0) < 1e-12);
      }
    }
  }
}

TEST_CASE("symmetry of the pair constants") {
  const AspectRatio g{4.0};
  for (double a : kAlphaGrid)
    for (double b : kAlphaGrid) {
      CHECK(mp::m2(a, b, g) == doctest::Approx(mp::m2(b, a, g)).epsilon(1e-14));
      CHECK(mp::m7(a, b, g) == doctest::Approx(mp::m7(b, a, g)).epsilon(1e-14));
      CHECK(mp::omega_tilde(a, b, g) == doctest::Approx(mp::omega_tilde(b, a, g)).epsilon(1e-14));
      CHECK(mp::theta_tilde(a, b, g) == doctest::Approx(mp::theta_tilde(b, a, g)).epsilon(1e-14));
      CHECK(mp::zeta_tilde(a, b, g) == doctest::Approx(mp::zeta_tilde(b, a, g)).epsilon(1e-14));
      CHECK(mp::tau_tilde(a, b, g) == doctest::Approx(mp::tau_tilde(b, a, g)).epsilon(1e-14));
    }
  // m8 and the (kappa, mu) pair are order-sensitive by construction
  CHECK(std::fabs(mp::m8(4.0, 0.2, g) - mp::m8(0.2, 4.0, g)) > 1e-6);
  CHECK(std::fabs(mp::kappa_tilde(4.0, 0.2, g) - mp::kappa_tilde(0.2, 4.0, g)) > 1e-6);
  CHECK(std::fabs(mp::mu_tilde(4.0, 0.2, g) - mp::mu_tilde(0.2, 4.0, g)) > 1e-6);
}

TEST_CASE("pack theory evaluates at the realized aspect ratio") {
  ModelConfig config = two_spike_config(4.0, 0.2, 4.0, 999);
  // p = round(999/4) = 250, so realized n/p = 3.996 != 4
  CHECK(config.p() == 250);
  const AspectRatio realized{config.realized_gamma_sq()};
  const auto packs = mp::pack_theory(config);
  REQUIRE(packs.size() == 2);
  CHECK(packs[0].alpha == 4.0);
  CHECK(packs[0].multiplicity == 1);
  CHECK(packs[0].rho == doctest::Approx(mp::rho(4.0, realized)).epsilon(1e-14));
  CHECK(packs[0].scaling == doctest::Approx(mp::scaling(4.0, realized)).epsilon(1e-14));
  CHECK(packs[1].rho == doctest::Approx(mp::rho(0.2, realized)).epsilon(1e-14));
  CHECK(packs[0].rho != doctest::Approx(mp::rho(4.0, AspectRatio{4.0})).epsilon(1e-14));
}

TEST_CASE("eigenvalue covariance tensor: Gaussian single spike") {
  ModelConfig config;
  config.spikes = {{4.0, 1}};
  config.gamma_sq = 4.0;
  config.n = 4000;  // p = 1000, realized ratio exactly 4
  config.family.kind = FamilyKind::Gaussian;

  const AspectRatio g{4.0};
  const auto tensor = mp::eigenvalue_cov(config);
  REQUIRE(tensor.labels.size() == 1);
  const double var_g = tensor.at({0, 0, 0}, {0, 0, 0});
  // Gaussian: Var G = 2 theta alpha^2
  CHECK(var_g == doctest::Approx(2.0 * mp::theta_tilde(4.0, 4.0, g) * 16.0).epsilon(1e-13));
  // eigenvalue fluctuation variance Var G / s^2 = 280/9 at this corner
  const double s = mp::scaling(4.0, g);
  CHECK(var_g / (s * s) == doctest::Approx(280.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("eigenvalue covariance tensor: multiplicity-two pack") {
  ModelConfig config;
  config.spikes = {{4.0, 2}};
  config.gamma_sq = 4.0;
  config.n = 4000;
  config.family.kind = FamilyKind::Gaussian;

  const AspectRatio g{4.0};
  const double om = mp::omega_tilde(4.0, 4.0, g);
  const double th = mp::theta_tilde(4.0, 4.0, g);
  const auto tensor = mp::eigenvalue_cov(config);
  REQUIRE(tensor.labels.size() == 3);  // (s,t) in {(0,0), (0,1), (1,1)}

  // diagonal entries of G: Var = 2 theta alpha^2, Cov(G_11, G_22) = 0 for Gaussian
  CHECK(tensor.at({0, 0, 0}, {0, 0, 0}) == doctest::Approx(2.0 * th * 16.0).epsilon(1e-13));
  CHECK(tensor.at({0, 1, 1}, {0, 1, 1}) == doctest::Approx(2.0 * th * 16.0).epsilon(1e-13));
  CHECK(tensor.at({0, 0, 0}, {0, 1, 1}) == doctest::Approx(0.0));
  // off-diagonal entry: Var G_12 = theta alpha^2, uncorrelated with the diagonal
  CHECK(tensor.at({0, 0, 1}, {0, 0, 1}) == doctest::Approx(th * 16.0).epsilon(1e-13));
  CHECK(tensor.at({0, 0, 0}, {0, 0, 1}) == doctest::Approx(0.0));
  CHECK(om < th);  // sanity on the constants feeding the law
}

TEST_CASE("eigenvalue covariance tensor: inter-pack coupling") {
  const AspectRatio g{4.0};

  // Gaussian packs decouple: E[xi_j^2 xi_j'^2] - alpha alpha' = 0
  ModelConfig gauss = two_spike_config(4.0, 0.2, 4.0, 4000);
  const auto tg = mp::eigenvalue_cov(gauss);
  CHECK(tg.at({0, 0, 0}, {1, 0, 0}) == doctest::Approx(0.0));

  // the shared radial factor of the scale mixture couples them
  ModelConfig mix = two_spike_config(4.0, 0.2, 4.0, 4000, FamilyKind::ScaleMixtureGaussian);
  const double e_r4 = mix.family.mixture.e_r4();
  CHECK(e_r4 == doctest::Approx(1.75).epsilon(1e-14));
  const auto tm = mp::eigenvalue_cov(mix);
  const double expected = mp::omega_tilde(4.0, 0.2, g) * 4.0 * 0.2 * (e_r4 - 1.0);
  CHECK(tm.at({0, 0, 0}, {1, 0, 0}) == doctest::Approx(expected).epsilon(1e-13));
  CHECK(tm.at({0, 0, 0}, {1, 0, 0}) > 0.0);
}

TEST_CASE("covariance tensors are positive semidefinite") {
  // Mixture family with a repeated spike: the most coupled case we support.
  ModelConfig config;
  config.spikes = {{4.0, 2}, {0.2, 1}};
  config.gamma_sq = 4.0;
  config.n = 4000;
  config.family.kind = FamilyKind::ScaleMixtureGaussian;

  const auto ev = mp::eigenvalue_cov(config);
  double trace = 0.0;
  for (int i = 0; i < ev.cov.rows(); ++i) trace += ev.cov(i, i);
  CHECK(eigen::min_eigenvalue(ev.cov) > -1e-10 * trace);

  ModelConfig distinct = two_spike_config(4.0, 2.5, 4.0, 4000);
  const auto vec = mp::eigenvector_cov(distinct);
  double vtrace = 0.0;
  for (int i = 0; i < vec.cov.rows(); ++i) vtrace += vec.cov(i, i);
  CHECK(eigen::min_eigenvalue(vec.cov) > -1e-10 * vtrace);
}

TEST_CASE("eigenvector law: entries and coefficients") {
  ModelConfig config = two_spike_config(4.0, 2.5, 4.0, 4000);
  const AspectRatio g{4.0};

  ModelConfig repeated;
  repeated.spikes = {{4.0, 2}};
  repeated.gamma_sq = 4.0;
  repeated.n = 4000;
  CHECK_THROWS_AS(mp::eigenvector_cov(repeated), std::invalid_argument);

  const auto tensor = mp::eigenvector_cov(config);
  REQUIRE(tensor.labels.size() == 4);
  // Var G^{(j)}_i for i != j reduces to theta_{jj} alpha_j alpha_i (Gaussian)
  const double var_g01 = tensor.at({0, 1, -1}, {0, 1, -1});
  CHECK(var_g01 == doctest::Approx(mp::theta_tilde(4.0, 4.0, g) * 4.0 * 2.5).epsilon(1e-13));

  const double c01 = mp::vec_coefficient(config, 0, 1);
  CHECK(c01 == doctest::Approx(4.0 / (mp::rho(4.0, g) * 1.5)).epsilon(1e-14));
  const double c10 = mp::vec_coefficient(config, 1, 0);
  CHECK(c10 < 0.0);  // alpha_j - alpha_i flips sign for the lower pack
  CHECK_THROWS_AS(mp::vec_coefficient(config, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(mp::vec_coefficient(config, 0, 2), std::out_of_range);

  // variance of the scaled eigenvector entry sqrt(N) u_hat^{(0)}_1
  const double var_entry = c01 * c01 * var_g01;
  CHECK(var_entry == doctest::Approx(4.5716).epsilon(5e-5));  // frozen regression anchor
}

TEST_CASE("angle limit theory") {
  ModelConfig config;
  config.spikes = {{4.0, 1}};
  config.gamma_sq = 4.0;
  config.n = 4000;

  const AspectRatio g{4.0};
  const auto th = mp::angle_theory(config, 0);
  const double s = mp::scaling(4.0, g);
  CHECK(th.cos_limit == doctest::Approx(1.0 / std::sqrt(s)).epsilon(1e-14));
  CHECK(th.cos_limit == doctest::Approx(0.9473309334313419).epsilon(1e-12));
  CHECK(th.a_coeff == doctest::Approx(0.25 * mp::m4(4.0, g) * 4.0 / s).epsilon(1e-14));

  // Gaussian component variances in terms of the pair constants
  CHECK(th.g_var == doctest::Approx(2.0 * mp::theta_tilde(4.0, 4.0, g) * 16.0).epsilon(1e-13));
  CHECK(th.h_var == doctest::Approx(2.0 * mp::tau_tilde(4.0, 4.0, g) * 16.0).epsilon(1e-13));
  CHECK(th.gh_cov == doctest::Approx(2.0 * mp::mu_tilde(4.0, 4.0, g) * 16.0).epsilon(1e-13));
  const double assembled =
      (th.a_coeff * th.a_coeff * th.g_var - 2.0 * th.a_coeff * th.gh_cov + th.h_var) / 4.0;
  CHECK(th.t_var == doctest::Approx(assembled).epsilon(1e-14));
  CHECK(th.t_var > 0.0);
  CHECK(th.t_var == doctest::Approx(0.045995006842387096).epsilon(1e-12));  // frozen anchor

  ModelConfig repeated;
  repeated.spikes = {{4.0, 2}};
  repeated.gamma_sq = 4.0;
  repeated.n = 4000;
  CHECK_THROWS_AS(mp::angle_theory(repeated, 0), std::invalid_argument);
  CHECK_THROWS_AS(mp::angle_theory(config, 1), std::out_of_range);
}

TEST_CASE("tensor index lookup") {
  ModelConfig config = two_spike_config(4.0, 0.2, 4.0, 4000);
  const auto tensor = mp::eigenvalue_cov(config);
  CHECK(tensor.index_of({0, 0, 0}) == 0);
  CHECK(tensor.index_of({1, 0, 0}) == 1);
  CHECK_THROWS_AS(tensor.index_of({2, 0, 0}), std::out_of_range);
  CHECK(tensor.at({0, 0, 0}, {1, 0, 0}) == tensor.at({1, 0, 0}, {0, 0, 0}));
}
