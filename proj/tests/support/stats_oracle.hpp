#pragma once

// Textbook paired t-test, written independently of the library (no Boost):
// Student's t CDF through the regularized incomplete beta function
// (continued fraction, modified Lentz), quantile by bisection.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

using real = long double;

inline real beta_cf(real a, real b, real x) {
  const real tiny = 1e-300L;
  real c = 1, d = 1 - (a + b) * x / (a + 1);
  if (std::fabs(d) < tiny) d = tiny;
  d = 1 / d;
  real h = d;
  for (int m = 1; m <= 10000; ++m) {
    const real m2 = 2.0L * m;
    real aa = m * (b - m) * x / ((a + m2 - 1) * (a + m2));
    d = 1 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1 / d;
    h *= d * c;
    aa = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1));
    d = 1 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1 / d;
    const real del = d * c;
    h *= del;
    if (std::fabs(del - 1) < 1e-18L) break;
  }
  return h;
}

// I_x(a, b)
inline real inc_beta(real a, real b, real x) {
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  const real lbeta = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  const real front = std::exp(lbeta + a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1) / (a + b + 2)) return front * beta_cf(a, b, x) / a;
  return 1 - front * beta_cf(b, a, 1 - x) / b;
}

// P(T > t) for t >= 0.
inline real t_upper_tail(real t, real df) {
  return 0.5L * inc_beta(df / 2, 0.5L, df / (df + t * t));
}

inline real t_quantile_upper(real alpha, real df) {
  real lo = 0, hi = 1;
  while (t_upper_tail(hi, df) > alpha) hi *= 2;
  for (int i = 0; i < 200; ++i) {
    const real mid = (lo + hi) / 2;
    if (t_upper_tail(mid, df) > alpha) lo = mid;
    else hi = mid;
  }
  return (lo + hi) / 2;
}

struct Paired {
  real mean, sd, t, d, ci_low, ci_high, p;
};

inline Paired paired(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  std::vector<real> diff(n);
  real sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    diff[i] = static_cast<real>(a[i]) - static_cast<real>(b[i]);
    sum += diff[i];
  }
  Paired r{};
  r.mean = sum / n;
  real ss = 0;
  for (auto x : diff) ss += (x - r.mean) * (x - r.mean);
  r.sd = std::sqrt(ss / (n - 1));
  const real se = r.sd / std::sqrt(static_cast<real>(n));
  r.t = r.mean / se;
  r.d = r.mean / r.sd;
  const real df = static_cast<real>(n - 1);
  r.p = 2 * t_upper_tail(std::fabs(r.t), df);
  const real q = t_quantile_upper(0.025L, df);
  r.ci_low = r.mean - q * se;
  r.ci_high = r.mean + q * se;
  return r;
}

}  // namespace oracle
