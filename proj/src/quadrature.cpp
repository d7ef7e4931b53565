#include "spikelab/quadrature.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace spikelab::quadrature {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct GlRule {
  Vec nodes;   // strictly inside (-1, 1)
  Vec weights;
};

// Gauss-Legendre nodes/weights via Newton iteration on the Legendre
// recurrence. Rules are cached: the oracle re-uses the same handful of sizes
// across hundreds of integrals.
const GlRule& gl_rule(int n) {
  static std::map<int, GlRule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  GlRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5)); // Tricomi initial guess
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * x * p1 - k * p2) / (k + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

std::function<double(double)> make_kernel(const IntegrandSpec& spec, mp::AspectRatio gamma) {
  switch (spec.kind) {
    case Kind::Normalization:
      return [](double) { return 1.0; };
    case Kind::M1: {
      const double r = mp::rho(spec.alpha, gamma);
      return [r](double x) { return x / (r - x); };
    }
    case Kind::M2: {
      const double r = mp::rho(spec.alpha, gamma);
      const double rp = mp::rho(*spec.alpha_prime, gamma);
      return [r, rp](double x) { return x * x / ((r - x) * (rp - x)); };
    }
    case Kind::M3: {
      const double r = mp::rho(spec.alpha, gamma);
      return [r](double x) { return x / ((r - x) * (r - x)); };
    }
    case Kind::M4: {
      const double r = mp::rho(spec.alpha, gamma);
      return [r](double x) { return 2.0 * x / ((r - x) * (r - x) * (r - x)); };
    }
    case Kind::M5: {
      const double r = mp::rho(spec.alpha, gamma);
      return [r](double x) { return 1.0 / ((r - x) * (r - x)); };
    }
    case Kind::M6: {
      const double r = mp::rho(spec.alpha, gamma);
      return [r](double x) { return 1.0 / (r - x); };
    }
    case Kind::M7: {
      const double r = mp::rho(spec.alpha, gamma);
      const double rp = mp::rho(*spec.alpha_prime, gamma);
      return [r, rp](double x) { return x * x / ((r - x) * (r - x) * (rp - x) * (rp - x)); };
    }
    case Kind::M8: {
      const double r = mp::rho(spec.alpha, gamma);
      const double rp = mp::rho(*spec.alpha_prime, gamma);
      return [r, rp](double x) { return x * x / ((r - x) * (rp - x) * (rp - x)); };
    }
  }
  throw std::logic_error("unknown integrand kind");
}

void check_rho_outside_sea(double alpha, mp::AspectRatio gamma) {
  const double r = mp::rho(alpha, gamma); // throws TransitionWindow if not detached
  const mp::MpSea sea = mp::mp_support(gamma);
  if (r > sea.lambda_minus && r < sea.lambda_plus)
    throw TransitionWindow(alpha, gamma.gamma_sq, "integrate_mp: rho inside the bulk support");
}

} // namespace

bool needs_alpha_prime(Kind kind) { return kind == Kind::M2 || kind == Kind::M7 || kind == Kind::M8; }

const char* kind_name(Kind kind) {
  switch (kind) {
    case Kind::M1: return "m1";
    case Kind::M2: return "m2";
    case Kind::M3: return "m3";
    case Kind::M4: return "m4";
    case Kind::M5: return "m5";
    case Kind::M6: return "m6";
    case Kind::M7: return "m7";
    case Kind::M8: return "m8";
    case Kind::Normalization: return "normalization";
  }
  return "unknown";
}

double integrate_mp(const IntegrandSpec& spec, mp::AspectRatio gamma, double rel_tol) {
  if (!(rel_tol > 1e-14 && rel_tol < 1e-2))
    throw std::invalid_argument("integrate_mp: rel_tol must lie in (1e-14, 1e-2)");
  if (needs_alpha_prime(spec.kind) != spec.alpha_prime.has_value())
    throw std::invalid_argument(std::string("integrate_mp: alpha_prime must be present exactly "
                                            "for two-argument kinds (kind=") +
                                kind_name(spec.kind) + ")");
  if (spec.kind != Kind::Normalization) {
    check_rho_outside_sea(spec.alpha, gamma);
    if (spec.alpha_prime) check_rho_outside_sea(*spec.alpha_prime, gamma);
  }

  const mp::MpSea sea = mp::mp_support(gamma);
  const double mid = 0.5 * (sea.lambda_minus + sea.lambda_plus);
  const double hw = 0.5 * (sea.lambda_plus - sea.lambda_minus);
  const auto kernel = make_kernel(spec, gamma);

  // Substitution x = mid + hw sin(u), u in [-pi/2, pi/2]:
  //   density(x) dx = gamma_sq hw^2 cos^2(u) / (2 pi x) du,
  // analytic in u; Gauss-Legendre nodes are interior, so x never touches an
  // edge of the support.
  const double scale = gamma.gamma_sq * hw * hw / (2.0 * kPi);
  auto level = [&](int n) {
    const GlRule& rule = gl_rule(n);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double u = rule.nodes[i] * (kPi / 2.0);
      const double c = std::cos(u);
      const double x = mid + hw * std::sin(u);
      acc += rule.weights[i] * kernel(x) * scale * c * c / x;
    }
    return acc * (kPi / 2.0);
  };

  double prev = level(16);
  for (int n = 32; n <= 4096; n *= 2) {
    const double cur = level(n);
    if (std::fabs(cur - prev) <= rel_tol * std::max(std::fabs(cur), 1e-30)) return cur;
    prev = cur;
  }
  throw NonConvergence(std::string("integrate_mp: node budget exhausted for kind ") +
                       kind_name(spec.kind) + " at rel_tol " + std::to_string(rel_tol));
}

double MomentReport::max_rel_err() const {
  double m = 0.0;
  for (const auto& e : entries)
    if (!e.flagged && e.rel_err > m) m = e.rel_err;
  return m;
}

bool MomentReport::any_flagged() const {
  for (const auto& e : entries)
    if (e.flagged) return true;
  return false;
}

MomentReport verify_m_report(mp::AspectRatio gamma, const std::vector<double>& alphas,
                             double rel_tol) {
  MomentReport report;
  report.rel_tol = rel_tol;

  auto closed_value = [&](Kind kind, double a, std::optional<double> ap) -> double {
    switch (kind) {
      case Kind::M1: return mp::m1(a, gamma);
      case Kind::M2: return mp::m2(a, *ap, gamma);
      case Kind::M3: return mp::m3(a, gamma);
      case Kind::M4: return mp::m4(a, gamma);
      case Kind::M5: return mp::m5(a, gamma);
      case Kind::M6: return mp::m6(a, gamma);
      case Kind::M7: return mp::m7(a, *ap, gamma);
      case Kind::M8: return mp::m8(a, *ap, gamma);
      case Kind::Normalization: return 1.0;
    }
    throw std::logic_error("unknown kind");
  };

  auto add_entry = [&](Kind kind, double a, std::optional<double> ap) {
    MomentEntry entry;
    entry.kind = kind;
    entry.alpha = a;
    entry.alpha_prime = ap;
    try {
      entry.closed = closed_value(kind, a, ap);
      entry.quad = integrate_mp({kind, a, ap}, gamma, rel_tol);
      entry.abs_err = std::fabs(entry.closed - entry.quad);
      const double denom = std::max({std::fabs(entry.closed), std::fabs(entry.quad), 1e-300});
      entry.rel_err = entry.abs_err / denom;
    } catch (const std::exception& ex) {
      entry.flagged = true;
      entry.flag_reason = ex.what();
    }
    report.entries.push_back(std::move(entry));
  };

  add_entry(Kind::Normalization, 0.0, std::nullopt);
  for (Kind kind : {Kind::M1, Kind::M3, Kind::M4, Kind::M5, Kind::M6})
    for (double a : alphas) add_entry(kind, a, std::nullopt);
  for (Kind kind : {Kind::M2, Kind::M7, Kind::M8})
    for (double a : alphas)
      for (double ap : alphas) add_entry(kind, a, ap);
  return report;
}

} // namespace spikelab::quadrature
