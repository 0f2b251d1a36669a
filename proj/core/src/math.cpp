#include "slt/math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace slt {

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  double m = v[0];
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;  // all -inf, or a stray +inf dominates
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double lanczos_gamma(double x) {
  // g = 7, 9-term coefficient set; good to ~15 significant digits on the
  // positive real axis.
  static const double c[9] = {
      0.99999999999980993,  676.5203681218851,    -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,  12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
    const double pi = 3.14159265358979323846;
    return pi / (std::sin(pi * x) * lanczos_gamma(1.0 - x));
  }
  x -= 1.0;
  double a = c[0];
  const double t = x + 7.5;
  for (int i = 1; i < 9; ++i) a += c[i] / (x + i);
  return std::sqrt(2.0 * 3.14159265358979323846) * std::pow(t, x + 0.5) *
         std::exp(-t) * a;
}

double abs_normal_moment(double p) {
  return std::pow(2.0, p / 2.0) * lanczos_gamma((p + 1.0) / 2.0) /
         std::sqrt(3.14159265358979323846);
}

PanelRule gauss_legendre_panels(double lo, double hi, int panels) {
  if (panels < 1 || !(hi > lo))
    throw std::invalid_argument("gauss_legendre_panels: bad panel spec");
  // 4-point Gauss-Legendre on [-1, 1]
  static const double gx[4] = {-0.86113631159405257522, -0.33998104358485626480,
                               0.33998104358485626480, 0.86113631159405257522};
  static const double gw[4] = {0.34785484513745385737, 0.65214515486254614263,
                               0.65214515486254614263, 0.34785484513745385737};
  PanelRule r;
  r.nodes.reserve(4 * panels);
  r.weights.reserve(4 * panels);
  const double h = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double c = lo + (p + 0.5) * h;
    for (int k = 0; k < 4; ++k) {
      r.nodes.push_back(c + 0.5 * h * gx[k]);
      r.weights.push_back(0.5 * h * gw[k]);
    }
  }
  return r;
}

Estimate pool_inverse_variance(std::span<const Estimate> parts) {
  if (parts.empty()) throw std::invalid_argument("pool: no estimates");
  double sw = 0.0, swv = 0.0;
  for (const auto& e : parts) {
    if (!(e.se > 0.0)) throw std::invalid_argument("pool: nonpositive SE");
    const double w = 1.0 / (e.se * e.se);
    sw += w;
    swv += w * e.value;
  }
  return {swv / sw, std::sqrt(1.0 / sw)};
}

LineFit ols_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> se_y) {
  const size_t n = x.size();
  if (n < 2 || y.size() != n || se_y.size() != n)
    throw std::invalid_argument("ols_line: need >= 2 matching points");
  double xm = 0.0, ym = 0.0;
  for (size_t i = 0; i < n; ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= static_cast<double>(n);
  ym /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  if (sxx <= 0.0) throw std::invalid_argument("ols_line: degenerate x");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = ym - f.slope * xm;
  double v = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double c = (x[i] - xm) / sxx;
    v += c * c * se_y[i] * se_y[i];
  }
  f.slope_se = std::sqrt(v);
  return f;
}

MeanVar mean_var(std::span<const double> v) {
  MeanVar mv;
  double m = 0.0, m2 = 0.0;
  long n = 0;
  for (double x : v) {
    ++n;
    const double d = x - m;
    m += d / static_cast<double>(n);
    m2 += d * (x - m);
  }
  mv.mean = m;
  mv.n = n;
  mv.var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
  return mv;
}

}  // namespace slt
