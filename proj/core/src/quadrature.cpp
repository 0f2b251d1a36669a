#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "slt/math.hpp"
#include "slt/posterior.hpp"

namespace slt {

namespace {

void normalize_log_weights(std::vector<double>& lw) {
  const double z = log_sum_exp(lw);
  for (double& v : lw) v -= z;
}

}  // namespace

QuadratureGrid run_quadrature(const Model& model, const Dataset& data,
                              double beta, QuadratureSpec spec) {
  const int d = model.dim_w();
  if (d > 2)
    throw std::invalid_argument("run_quadrature: only d <= 2 is supported");
  if (data.n < 1) throw std::invalid_argument("run_quadrature: dataset is empty");
  if (data.dim != model.dim_x())
    throw std::invalid_argument("run_quadrature: dataset dimension mismatch");
  if (!(beta > 0.0)) throw std::invalid_argument("run_quadrature: beta must be > 0");

  int npd = spec.nodes_per_dim;
  if (npd == 0) npd = d == 1 ? 2048 : 416;
  const int min_npd = d == 1 ? 2000 : 400;
  if (npd < min_npd)
    throw std::invalid_argument("run_quadrature: nodes_per_dim below minimum");
  const int panels = (npd + 3) / 4;
  npd = 4 * panels;

  double xbar[2] = {0.0, 0.0};
  for (int i = 0; i < data.n; ++i) {
    auto p = data.point(i);
    for (int c = 0; c < data.dim; ++c) xbar[c] += p[c];
  }
  for (int c = 0; c < data.dim; ++c) xbar[c] /= data.n;
  const double beta_n = beta * data.n;

  // log-weight(node) = log(rule weight) + beta * sum_i log p(x_i | w) up to
  // data- and prior-constants, evaluated through the sufficient statistic:
  // sum_i log p = const + n (xbar . mu - |mu|^2 / 2).
  auto tilt = [&](std::span<const double> w) {
    double mu[2];
    model.mean_param(w, {mu, static_cast<size_t>(model.dim_x())});
    double v = 0.0;
    for (int c = 0; c < model.dim_x(); ++c)
      v += xbar[c] * mu[c] - 0.5 * mu[c] * mu[c];
    return beta_n * v;
  };

  QuadratureGrid g;
  g.dim_w = d;
  g.nodes_per_dim = npd;
  g.beta = beta;
  const Box& box = model.param_box();
  const PanelRule r0 =
      gauss_legendre_panels(box.dims[0].lo, box.dims[0].hi, panels);
  if (d == 1) {
    g.nodes.resize(npd);
    g.log_weight.resize(npd);
    for (int i = 0; i < npd; ++i) {
      g.nodes[i] = r0.nodes[i];
      g.log_weight[i] = std::log(r0.weights[i]) + tilt({&g.nodes[i], 1});
    }
  } else {
    const PanelRule r1 =
        gauss_legendre_panels(box.dims[1].lo, box.dims[1].hi, panels);
    const size_t total = static_cast<size_t>(npd) * npd;
    g.nodes.resize(total * 2);
    g.log_weight.resize(total);
    size_t k = 0;
    for (int i = 0; i < npd; ++i) {
      for (int j = 0; j < npd; ++j, ++k) {
        g.nodes[2 * k] = r0.nodes[i];
        g.nodes[2 * k + 1] = r1.nodes[j];
        g.log_weight[k] = std::log(r0.weights[i]) + std::log(r1.weights[j]) +
                          tilt({&g.nodes[2 * k], 2});
      }
    }
  }
  normalize_log_weights(g.log_weight);
  return g;
}

PosteriorAtoms atoms_from(const Model& model, const PosteriorDraws& draws) {
  PosteriorAtoms a;
  a.dim_mu = model.dim_x();
  a.from_draws = true;
  const int s = draws.count();
  a.mu.resize(static_cast<size_t>(s) * a.dim_mu);
  a.log_w.assign(s, -std::log(static_cast<double>(s)));
  a.loss.resize(s);
  for (int i = 0; i < s; ++i) {
    model.mean_param(draws.draw(i),
                     {a.mu.data() + static_cast<size_t>(i) * a.dim_mu,
                      static_cast<size_t>(a.dim_mu)});
    a.loss[i] = model.loss(draws.draw(i));
  }
  return a;
}

PosteriorAtoms atoms_from(const Model& model, const QuadratureGrid& grid) {
  PosteriorAtoms a;
  a.dim_mu = model.dim_x();
  a.from_draws = false;
  const int k = grid.count();
  a.mu.resize(static_cast<size_t>(k) * a.dim_mu);
  a.log_w = grid.log_weight;
  a.loss.resize(k);
  for (int i = 0; i < k; ++i) {
    model.mean_param(grid.node(i),
                     {a.mu.data() + static_cast<size_t>(i) * a.dim_mu,
                      static_cast<size_t>(a.dim_mu)});
    a.loss[i] = model.loss(grid.node(i));
  }
  return a;
}

PosteriorAtoms compress_atoms(const Model& model, const PosteriorAtoms& atoms,
                              int bins) {
  if (atoms.dim_mu != 1)
    throw std::invalid_argument("compress_atoms: scalar mean parameter only");
  if (atoms.from_draws)
    throw std::invalid_argument("compress_atoms: grid posteriors only");
  if (bins < 8) throw std::invalid_argument("compress_atoms: too few bins");

  double lo = atoms.mu[0], hi = atoms.mu[0];
  for (double m : atoms.mu) {
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  if (!(hi > lo)) hi = lo + 1.0;  // degenerate: everything lands in bin 0
  const double dx = (hi - lo) / (bins - 1);

  std::vector<double> w(bins, 0.0);
  for (int i = 0; i < atoms.count(); ++i) {
    const double wi = std::exp(atoms.log_w[i]);
    const double pos = (atoms.mu[i] - lo) / dx;
    int k = static_cast<int>(pos);
    k = std::clamp(k, 0, bins - 2);
    const double frac = std::clamp(pos - k, 0.0, 1.0);
    w[k] += wi * (1.0 - frac);
    w[k + 1] += wi * frac;
  }

  PosteriorAtoms out;
  out.dim_mu = 1;
  out.from_draws = false;
  double total = 0.0;
  for (double v : w) total += v;
  for (int k = 0; k < bins; ++k) {
    if (w[k] <= 0.0) continue;
    const double mu = lo + k * dx;
    out.mu.push_back(mu);
    out.log_w.push_back(std::log(w[k] / total));
    out.loss.push_back(model.loss_from_mean({&mu, 1}));
  }
  return out;
}

PosteriorAtoms prune_atoms(const PosteriorAtoms& atoms, double log_window) {
  double mx = atoms.log_w[0];
  for (double v : atoms.log_w) mx = std::max(mx, v);
  PosteriorAtoms out;
  out.dim_mu = atoms.dim_mu;
  out.from_draws = atoms.from_draws;
  for (int i = 0; i < atoms.count(); ++i) {
    if (atoms.log_w[i] < mx - log_window) continue;
    for (int c = 0; c < atoms.dim_mu; ++c)
      out.mu.push_back(atoms.mu[static_cast<size_t>(i) * atoms.dim_mu + c]);
    out.log_w.push_back(atoms.log_w[i]);
    out.loss.push_back(atoms.loss[i]);
  }
  const double z = log_sum_exp(out.log_w);
  for (double& v : out.log_w) v -= z;
  return out;
}

double prune_log_window(const Model& model,
                        std::span<const Dataset* const> datasets) {
  double window = 34.0;
  for (int c = 0; c < model.dim_x(); ++c) {
    double mx = 0.0;
    for (const Dataset* d : datasets)
      for (int i = 0; i < d->n; ++i)
        mx = std::max(mx, std::abs(d->point(i)[c]));
    window += mx * model.mean_range(c).width();
  }
  return window;
}

}  // namespace slt
