#include "slt/model.hpp"

#include <cmath>
#include <stdexcept>

#include "slt/math.hpp"
#include "slt/rng.hpp"

namespace slt {

namespace {

// s(a) = sqrt(a^4 - a^2 + 1), the second mean coordinate of the anomalous
// model; h(a) = s(a) - 1 computed without cancellation near a = 0.
double s_of_a(double a) {
  const double a2 = a * a;
  return std::sqrt(a2 * a2 - a2 + 1.0);
}
double h_of_a(double a) {
  const double a2 = a * a;
  return (a2 * a2 - a2) / (s_of_a(a) + 1.0);
}

double sq(double x) { return x * x; }

}  // namespace

bool Box::contains(std::span<const double> w) const {
  if (w.size() != dims.size()) return false;
  for (size_t i = 0; i < dims.size(); ++i)
    if (!(w[i] >= dims[i].lo && w[i] <= dims[i].hi)) return false;
  return true;
}

double Box::volume() const {
  double v = 1.0;
  for (const auto& d : dims) v *= d.width();
  return v;
}

Model::Model(Kind kind, std::string id, int dim_x, int dim_w, Box box,
             double entropy, TheoryCard card, std::vector<double> w0)
    : kind_(kind),
      id_(std::move(id)),
      dim_x_(dim_x),
      dim_w_(dim_w),
      box_(std::move(box)),
      entropy_(entropy),
      card_(std::move(card)),
      w0_(std::move(w0)) {}

const std::vector<std::string>& Model::ids() {
  static const std::vector<std::string> v = {"regular1d", "singular_ab",
                                             "nonrenorm_a"};
  return v;
}

const Model& Model::by_id(std::string_view id) {
  static const Model regular1d = [] {
    TheoryCard c;
    c.lambda = 0.5;
    c.nu = 0.5;
    c.multiplicity = 1;
    c.l0 = kLogSqrt2Pi + 0.5;
    c.kappa = 1.0;
    c.derivation_note =
        "regular realizable Gaussian location model: lambda = d/2 = 1/2, "
        "nu = tr(I J^-1)/2 = 1/2 since I = J = 1 at a = 0.";
    return Model(Kind::Regular1d, "regular1d", 1, 1,
                 Box{{{-3.0, 3.0}}}, kLogSqrt2Pi + 0.5, c, {0.0});
  }();
  static const Model singular_ab = [] {
    TheoryCard c;
    c.lambda = 0.5;
    c.nu = std::nullopt;  // unknown; measured, never asserted
    c.multiplicity = 2;
    c.l0 = kLogSqrt2Pi + 0.5;
    c.kappa = 1.0;
    c.derivation_note =
        "zeta(z) = (1/4) int_{[-1,1]^2} (a^2 b^2 / 2)^z da db = "
        "2^{-z} / (2z+1)^2: largest pole z = -1/2 of order 2, so "
        "lambda = 1/2, multiplicity m = 2. nu has no known closed form "
        "for this model.";
    return Model(Kind::SingularAB, "singular_ab", 1, 2,
                 Box{{{-1.0, 1.0}, {-1.0, 1.0}}}, kLogSqrt2Pi + 0.5, c,
                 {0.0, 0.0});
  }();
  static const Model nonrenorm_a = [] {
    TheoryCard c;
    c.lambda = 0.25;
    c.nu = std::nullopt;  // n * E[Y_t] diverges; no kappa=1 constant exists
    c.multiplicity = 1;
    c.l0 = kLog2Pi + 1.5;
    c.kappa = 2.0 / 3.0;
    c.q_constant =
        std::pow(2.0, 7.0 / 6.0) * lanczos_gamma(7.0 / 6.0) /
        std::sqrt(2.0 * 3.14159265358979323846);
    c.derivation_note =
        "nonrenormalizable pair: L(a) - L0 = a^4/2 but D(p0||p_a) ~ a^2/2, "
        "so the loss/divergence ratio vanishes at the optimum. Learning "
        "curves follow the n^{-2/3} regime with Q = 2^{7/6} Gamma(7/6) / "
        "sqrt(2 pi). The zeta pole of (a^4/2)^z gives lambda = 1/4, m = 1, "
        "but the universal kappa=1 law does not govern this model.";
    return Model(Kind::NonrenormA, "nonrenorm_a", 2, 1,
                 Box{{{-1.5, 1.5}}}, kLog2Pi + 1.0, c, {0.0});
  }();
  if (id == "regular1d") return regular1d;
  if (id == "singular_ab") return singular_ab;
  if (id == "nonrenorm_a") return nonrenorm_a;
  throw ConfigError("unknown model id '" + std::string(id) + "'", 0, "model");
}

void Model::check_in_box(std::span<const double> w) const {
  if (!box_.contains(w))
    throw std::domain_error("parameter outside the model box for " + id_);
}

void Model::mean_param(std::span<const double> w, std::span<double> out) const {
  switch (kind_) {
    case Kind::Regular1d:
      out[0] = w[0];
      break;
    case Kind::SingularAB:
      out[0] = w[0] * w[1];
      break;
    case Kind::NonrenormA:
      out[0] = w[0];
      out[1] = s_of_a(w[0]);
      break;
  }
}

Interval Model::mean_range(int coord) const {
  switch (kind_) {
    case Kind::Regular1d:
      return box_.dims[0];
    case Kind::SingularAB:
      return {-1.0, 1.0};
    case Kind::NonrenormA:
      if (coord == 0) return box_.dims[0];
      // s attains its minimum sqrt(3)/2 at a^2 = 1/2 and its maximum at the
      // box edge.
      return {std::sqrt(3.0) / 2.0, s_of_a(box_.dims[0].hi)};
  }
  return {};
}

double Model::log_p(std::span<const double> x, std::span<const double> w) const {
  double mu[2];
  mean_param(w, {mu, static_cast<size_t>(dim_x_)});
  double q = 0.0;
  for (int c = 0; c < dim_x_; ++c) q += sq(x[c] - mu[c]);
  return -0.5 * dim_x_ * kLog2Pi - 0.5 * q;
}

double Model::log_q(std::span<const double> x) const {
  double q = 0.0;
  for (int c = 0; c < dim_x_; ++c) q += sq(x[c]);
  return -0.5 * dim_x_ * kLog2Pi - 0.5 * q;
}

double Model::loss(std::span<const double> w) const {
  switch (kind_) {
    case Kind::Regular1d:
      return card_.l0 + 0.5 * sq(w[0]);
    case Kind::SingularAB:
      return card_.l0 + 0.5 * sq(w[0] * w[1]);
    case Kind::NonrenormA:
      return card_.l0 + 0.5 * sq(sq(w[0]));
  }
  return 0.0;
}

double Model::loss_from_mean(std::span<const double> mu) const {
  double q = 0.0;
  for (int c = 0; c < dim_x_; ++c) q += sq(mu[c]);
  return entropy_ + 0.5 * q;
}

double Model::log_density_ratio(std::span<const double> x,
                                std::span<const double> w) const {
  check_in_box(w);
  switch (kind_) {
    case Kind::Regular1d:
      return 0.5 * sq(w[0]) - w[0] * x[0];
    case Kind::SingularAB: {
      const double c = w[0] * w[1];
      return 0.5 * sq(c) - c * x[0];
    }
    case Kind::NonrenormA:
      return -w[0] * x[0] - h_of_a(w[0]) * x[1] + 0.5 * sq(sq(w[0]));
  }
  return 0.0;
}

double Model::kl_true(std::span<const double> w) const {
  check_in_box(w);
  return loss(w) - card_.l0;
}

double Model::kl_from_p0(std::span<const double> w) const {
  check_in_box(w);
  switch (kind_) {
    case Kind::Regular1d:
      return 0.5 * sq(w[0]);
    case Kind::SingularAB:
      return 0.5 * sq(w[0] * w[1]);
    case Kind::NonrenormA:
      return 0.5 * sq(sq(w[0])) - h_of_a(w[0]);
  }
  return 0.0;
}

Dataset Model::sample_true(int n, std::uint64_t seed) const {
  if (n < 1) throw std::invalid_argument("sample_true: n must be >= 1");
  RngStream rng(seed);
  Dataset d;
  d.n = n;
  d.dim = dim_x_;
  d.x.resize(static_cast<size_t>(n) * dim_x_);
  for (double& v : d.x) v = rng.gaussian();
  return d;
}

void Model::mean_jacobian(std::span<const double> w,
                          std::span<double> out) const {
  switch (kind_) {
    case Kind::Regular1d:
      out[0] = 1.0;
      break;
    case Kind::SingularAB:
      out[0] = w[1];  // d(ab)/da
      out[1] = w[0];  // d(ab)/db
      break;
    case Kind::NonrenormA: {
      const double a = w[0];
      out[0] = 1.0;
      out[1] = (2.0 * a * a * a - a) / s_of_a(a);  // ds/da
      break;
    }
  }
}

double FisherPair::nu_regular() const {
  if (d == 1) return 0.5 * i[0] / j[0];
  const double det = j[0] * j[3] - j[1] * j[2];
  // tr(I J^{-1}) for symmetric 2x2
  const double tr =
      (i[0] * j[3] - i[1] * j[2] - i[2] * j[1] + i[3] * j[0]) / det;
  return 0.5 * tr;
}

FisherPair fisher_pair(const Model& model, std::span<const double> w0,
                       long mc_budget, std::uint64_t seed) {
  if (!model.param_box().contains(w0))
    throw std::domain_error("fisher_pair: w0 outside the model box");
  if (mc_budget < 1) throw std::invalid_argument("fisher_pair: empty budget");
  const int d = model.dim_w();
  const int nx = model.dim_x();
  FisherPair fp;
  fp.d = d;

  // J = hess L(w0) by central differences of the closed-form loss.
  const double h = 1e-4;
  std::vector<double> w(w0.begin(), w0.end());
  auto lat = [&](double d0, double d1) {
    std::vector<double> ww = w;
    ww[0] += d0;
    if (d > 1) ww[1] += d1;
    return model.loss(ww);
  };
  const double l00 = model.loss(w);
  fp.j[0] = (lat(h, 0) - 2.0 * l00 + lat(-h, 0)) / (h * h);
  if (d == 2) {
    fp.j[3] = (lat(0, h) - 2.0 * l00 + lat(0, -h)) / (h * h);
    fp.j[1] = fp.j[2] =
        (lat(h, h) - lat(h, -h) - lat(-h, h) + lat(-h, -h)) / (4.0 * h * h);
  }
  double min_eig;
  if (d == 1) {
    min_eig = fp.j[0];
  } else {
    const double tr = fp.j[0] + fp.j[3];
    const double det = fp.j[0] * fp.j[3] - fp.j[1] * fp.j[2];
    min_eig = 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
  }
  if (min_eig < 1e-6)
    throw SingularFisherError("fisher_pair: hessian of L is singular at w0 (min eig " +
                              std::to_string(min_eig) + ")");

  // I by Monte Carlo with closed-form gradients of log p.
  RngStream rng(derive_seed(seed, 0, 0, StreamKind::fisher));
  std::vector<double> jac(static_cast<size_t>(nx) * d);
  std::vector<double> mu(nx), x(nx), g(d);
  model.mean_jacobian(w0, jac);
  model.mean_param(w0, mu);
  std::array<double, 4> acc{};
  for (long it = 0; it < mc_budget; ++it) {
    for (int c = 0; c < nx; ++c) x[c] = rng.gaussian();
    for (int jdx = 0; jdx < d; ++jdx) {
      double v = 0.0;
      for (int c = 0; c < nx; ++c)
        v += (x[c] - mu[c]) * jac[static_cast<size_t>(c) * d + jdx];
      g[jdx] = v;
    }
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) acc[static_cast<size_t>(r) * d + c] += g[r] * g[c];
  }
  for (int k = 0; k < d * d; ++k) fp.i[k] = acc[k] / static_cast<double>(mc_budget);
  return fp;
}

double renormalizability_ratio(const Model& model, double eps,
                               int grid_per_dim) {
  if (!(eps > 0.0)) throw std::invalid_argument("renormalizability_ratio: eps must be > 0");
  if (grid_per_dim < 2) throw std::invalid_argument("renormalizability_ratio: grid too coarse");

  // Smallest axis-aligned box enclosing W_eps = {D(p0||p_w) <= eps}.
  Box grid_box = model.param_box();
  switch (model.kind()) {
    case Model::Kind::Regular1d: {
      const double r = std::min(grid_box.dims[0].hi, std::sqrt(2.0 * eps));
      grid_box.dims[0] = {-r, r};
      break;
    }
    case Model::Kind::SingularAB:
      break;  // W_eps hugs both axes; the full box encloses it
    case Model::Kind::NonrenormA: {
      const double amax = grid_box.dims[0].hi;
      double lo = 0.0, hi = amax;
      const double dmax = 0.5 * sq(sq(amax)) - h_of_a(amax);
      if (dmax > eps) {
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double dm = 0.5 * sq(sq(mid)) - h_of_a(mid);
          (dm > eps ? hi : lo) = mid;
        }
      } else {
        lo = amax;
      }
      grid_box.dims[0] = {-lo, lo};
      break;
    }
  }

  const int d = model.dim_w();
  double best = -1.0;
  std::vector<double> w(d);
  const long per = grid_per_dim;
  const long total = d == 1 ? per : per * per;
  for (long idx = 0; idx < total; ++idx) {
    const long i0 = d == 1 ? idx : idx / per;
    const long i1 = d == 1 ? 0 : idx % per;
    w[0] = grid_box.dims[0].lo +
           (i0 + 0.5) * grid_box.dims[0].width() / static_cast<double>(per);
    if (d == 2)
      w[1] = grid_box.dims[1].lo +
             (i1 + 0.5) * grid_box.dims[1].width() / static_cast<double>(per);
    const double dkl = model.kl_from_p0(w);
    if (!(dkl > 0.0) || dkl > eps) continue;
    const double ratio = model.kl_true(w) / dkl;
    if (best < 0.0 || ratio < best) best = ratio;
  }
  if (best < 0.0)
    throw EmptyGridError("renormalizability_ratio: no grid point with 0 < D <= eps");
  return best;
}

PredictedObservables theory_predict(const TheoryCard& card, double beta,
                                    double n) {
  if (!(beta > 0.0)) throw std::invalid_argument("theory_predict: beta must be > 0");
  if (!(n >= 1.0)) throw std::invalid_argument("theory_predict: n must be >= 1");
  PredictedObservables p;
  p.l0 = card.l0;
  if (card.kappa == 1.0) {
    const double lam = card.lambda;
    p.gg_plus_gt_minus_2l0 = 2.0 * lam / (beta * n);
    if (card.nu) {
      const double nu = *card.nu;
      p.bg = card.l0 + ((lam - nu) / beta + nu) / n;
      p.bt = card.l0 + ((lam - nu) / beta - nu) / n;
      p.gg = card.l0 + (lam / beta + nu) / n;
      p.gt = card.l0 + (lam / beta - nu) / n;
      p.yg = 2.0 * nu / (beta * n);
      p.yt = p.yg;
    }
    return p;
  }
  // kappa = 2/3 anomalous regime
  if (!card.q_constant)
    throw MissingConstantError("theory_predict: kappa=2/3 card lacks Q");
  const double q = *card.q_constant;
  const double scale = q / std::pow(n, 2.0 / 3.0);
  p.bg = card.l0 + (0.5 - 1.0 / beta) * scale;
  p.bt = card.l0 - (1.5 + 1.0 / beta) * scale;
  p.gg = card.l0 + 0.5 * scale;
  p.gt = card.l0 - 1.5 * scale;
  p.yg = (2.0 / beta) * scale;
  p.yt = p.yg;
  p.gg_plus_gt_minus_2l0 = -scale;
  return p;
}

void require_full(const PredictedObservables& p) {
  if (!(p.bg && p.bt && p.gg && p.gt && p.yg && p.yt))
    throw MissingConstantError(
        "theory prediction incomplete: nu is unknown for this model");
}

}  // namespace slt
