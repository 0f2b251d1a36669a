#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace slt {

inline constexpr double kLog2Pi = 1.8378770664093454836;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// Max-shifted log(sum(exp(v))). Finite for any finite inputs; -inf for an
// empty span.
double log_sum_exp(std::span<const double> v);

// Gamma function via a 15-digit Lanczos approximation (g = 7, 9 terms).
double lanczos_gamma(double x);

// E[|Z|^p] for Z ~ N(0,1): 2^{p/2} Gamma((p+1)/2) / sqrt(pi).
double abs_normal_moment(double p);

// Composite Gauss-Legendre nodes over [lo, hi]: `panels` equal panels with a
// fixed 4-point rule each. Weights sum to (hi - lo).
struct PanelRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
PanelRule gauss_legendre_panels(double lo, double hi, int panels);

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

// Inverse-variance pooling of independent estimates.
Estimate pool_inverse_variance(std::span<const Estimate> parts);

// Ordinary least squares of y on x. slope_se propagates the supplied
// per-point standard errors through the OLS coefficients (measurement
// variances are known here; a residual-based SE with n-2 degrees of freedom
// would be far noisier on 4-point grids).
struct LineFit {
  double slope = 0.0;
  double slope_se = 0.0;
  double intercept = 0.0;
};
LineFit ols_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> se_y);

// Mean and unbiased sample variance in one pass (Welford).
struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  // S-1 denominator; 0 when n < 2
  long n = 0;
};
MeanVar mean_var(std::span<const double> v);

}  // namespace slt
