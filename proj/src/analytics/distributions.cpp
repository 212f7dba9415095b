#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/tools/roots.hpp>

#include "archiprompt/analytics.hpp"

namespace archiprompt::analytics {
namespace {

using boost::math::quadrature::gauss_kronrod;

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kTol = 1e-12;
constexpr unsigned kDepth = 15;
// Beyond this the chi density is narrow enough to treat df as infinite.
constexpr double kLargeDf = 1e5;
// Outer integral over the chi density: fixed panels, since the inner CDF is
// only accurate to ~1e-13 and adaptive refinement would chase that noise.
constexpr int kOuterPanels = 24;

double phi(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

// Phi(z) - Phi(z - w), evaluated in whichever tail keeps precision.
double normal_mass(double z, double w) {
  if (z - 0.5 * w > 0) return 0.5 * (std::erfc((z - w) * kInvSqrt2) - std::erfc(z * kInvSqrt2));
  return 0.5 * (std::erfc(-z * kInvSqrt2) - std::erfc(-(z - w) * kInvSqrt2));
}

void check_k(double k) {
  if (!(k >= 2) || !std::isfinite(k)) throw DomainError("studentized range needs k >= 2", {{"k", k}});
}

}  // namespace

double f_upper_tail(double f, double df1, double df2) {
  if (!(df1 > 0) || !(df2 > 0)) throw DomainError("F distribution needs positive degrees of freedom");
  if (std::isnan(f) || f < 0) throw DomainError("F statistic must be nonnegative", {{"f", f}});
  if (f == 0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return boost::math::ibeta(df2 / 2, df1 / 2, df2 / (df2 + df1 * f));
}

double normal_range_cdf(double w, double k) {
  check_k(k);
  if (std::isnan(w)) throw DomainError("range must be a number");
  if (w <= 0) return 0.0;
  if (std::isinf(w)) return 1.0;
  auto integrand = [&](double z) {
    double m = normal_mass(z, w);
    return m <= 0 ? 0.0 : phi(z) * std::pow(m, k - 1);
  };
  // The integrand is concentrated on [-8.5, w + 8.5]; split at the kink near w/2.
  double lo = gauss_kronrod<double, 61>::integrate(integrand, -8.5, 0.5 * w, kDepth, kTol);
  double hi = gauss_kronrod<double, 61>::integrate(integrand, 0.5 * w, w + 8.5, kDepth, kTol);
  double v = k * (lo + hi);
  return std::clamp(v, 0.0, 1.0);
}

double studentized_range_upper_tail(double q, double k, double df) {
  check_k(k);
  if (std::isnan(q) || std::isnan(df) || !(df > 0)) throw DomainError("studentized range needs df > 0");
  if (q <= 0) return 1.0;
  if (std::isinf(q)) return 0.0;
  if (std::isinf(df) || df > kLargeDf) return 1.0 - normal_range_cdf(q, k);

  // s = chi_df / sqrt(df) has density c * s^(df-1) * exp(-df s^2 / 2).
  const double log_c = (df / 2) * std::log(df / 2) + std::log(2.0) - std::lgamma(df / 2);
  auto density = [&](double s) {
    if (s <= 0) return 0.0;
    return std::exp(log_c + (df - 1) * std::log(s) - df * s * s / 2);
  };
  auto integrand = [&](double s) {
    double d = density(s);
    return d == 0 ? 0.0 : d * (1.0 - normal_range_cdf(q * s, k));
  };
  const double spread = 15.0 / std::sqrt(2 * df);
  const double a = std::max(0.0, 1.0 - spread);
  const double b = 1.0 + spread;
  const double h = (b - a) / kOuterPanels;
  double v = 0.0;
  for (int i = 0; i < kOuterPanels; ++i)
    v += boost::math::quadrature::gauss<double, 20>::integrate(integrand, a + i * h, a + (i + 1) * h);
  return std::clamp(v, 0.0, 1.0);
}

double studentized_range_quantile(double alpha, double k, double df) {
  if (!(alpha > 0 && alpha < 1)) throw DomainError("alpha must be in (0, 1)", {{"alpha", alpha}});
  check_k(k);
  auto g = [&](double q) { return studentized_range_upper_tail(q, k, df) - alpha; };
  double lo = 0.0;
  double hi = 4.0;
  while (g(hi) > 0) {
    lo = hi;
    hi *= 2;
    if (hi > 1e6) throw DomainError("studentized range quantile did not bracket");
  }
  std::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(g, lo, hi, boost::math::tools::eps_tolerance<double>(48), iters);
  return 0.5 * (r.first + r.second);
}

}  // namespace archiprompt::analytics
