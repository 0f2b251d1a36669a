#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "slt/errors.hpp"
#include "slt/model.hpp"

namespace slt {

struct McmcSettings {
  double beta = 1.0;
  int n_chains = 4;
  int burn_in = 5000;
  int kept_per_chain = 2500;
  int thin = 4;
  double init_jitter = 0.1;
  double target_accept = 0.35;
  void validate() const;  // throws std::invalid_argument
};

struct McmcDiagnostics {
  std::vector<double> accept_rate;  // per chain, post burn-in
  std::vector<double> ess;          // pooled, per coordinate
  std::vector<double> split_rhat;   // per coordinate
  double ess_min() const;
  double rhat_max() const;
};

// Draws from the beta-tempered posterior, chain-major order.
struct PosteriorDraws {
  int dim_w = 0;
  int n_chains = 0;
  int kept_per_chain = 0;
  double beta = 1.0;
  std::vector<double> draws;  // (n_chains * kept_per_chain) x dim_w
  McmcDiagnostics diag;
  int count() const { return n_chains * kept_per_chain; }
  std::span<const double> draw(int i) const {
    return {draws.data() + static_cast<size_t>(i) * dim_w,
            static_cast<size_t>(dim_w)};
  }
};

// Random-walk Metropolis with a single scalar step scale shared across
// coordinates, adapted toward target_accept during burn-in and frozen after.
// Deterministic given (model, data, settings, seed); chains use disjoint
// streams derived from (seed, chain index). Throws NonMixingError when the
// pooled ESS < 100 or split-Rhat > 1.1 on any coordinate.
PosteriorDraws run_mcmc(const Model& model, const Dataset& data,
                        const McmcSettings& settings, std::uint64_t seed);

struct QuadratureSpec {
  int nodes_per_dim = 0;  // 0 -> 2048 (d=1) or 416 (d=2)
};

// Deterministic quadrature representation of the posterior: composite
// 4-point Gauss-Legendre panels per dimension, log-weights normalized by
// log-sum-exp. Oracle for d <= 2.
struct QuadratureGrid {
  int dim_w = 0;
  int nodes_per_dim = 0;
  double beta = 1.0;
  std::vector<double> nodes;       // K x dim_w
  std::vector<double> log_weight;  // K, logsumexp == 0
  int count() const {
    return static_cast<int>(log_weight.size());
  }
  std::span<const double> node(int i) const {
    return {nodes.data() + static_cast<size_t>(i) * dim_w,
            static_cast<size_t>(dim_w)};
  }
};

QuadratureGrid run_quadrature(const Model& model, const Dataset& data,
                              double beta, QuadratureSpec spec = {});

// Posterior expectation of g(w).
template <class F>
double expect(const PosteriorDraws& d, F&& g) {
  double s = 0.0;
  for (int i = 0; i < d.count(); ++i) s += g(d.draw(i));
  return s / d.count();
}
template <class F>
double expect(const QuadratureGrid& q, F&& g) {
  double s = 0.0;
  for (int i = 0; i < q.count(); ++i)
    s += std::exp(q.log_weight[i]) * g(q.node(i));
  return s;
}

// Split-chain diagnostics of a scalar trace (chain-major, equal lengths).
struct TraceDiag {
  double ess = 0.0;
  double rhat = 1.0;
  double mean = 0.0;
  double var_plus = 0.0;
};
TraceDiag trace_diagnostics(std::span<const double> values, int n_chains);

// Monte Carlo standard error of the posterior mean of g, from the trace ESS.
double mcmc_se(const PosteriorDraws& d,
               const std::function<double(std::span<const double>)>& g);

// Weighted-atom view of a posterior used by the observables kernel: the
// Gaussian mean mu(w), normalized log-weight, and closed-form loss per atom.
struct PosteriorAtoms {
  int dim_mu = 0;
  std::vector<double> mu;     // K x dim_mu
  std::vector<double> log_w;  // normalized
  std::vector<double> loss;   // L(w) per atom
  bool from_draws = false;    // equal weights; S-1 variance convention
  int count() const { return static_cast<int>(log_w.size()); }
};

PosteriorAtoms atoms_from(const Model& model, const PosteriorDraws& draws);
PosteriorAtoms atoms_from(const Model& model, const QuadratureGrid& grid);

// Collapse a large scalar-mean atom set onto `bins` uniform bins, splitting
// each atom's weight between the two neighboring bin centers so total weight
// and first moment are preserved exactly.
PosteriorAtoms compress_atoms(const Model& model, const PosteriorAtoms& atoms,
                              int bins);

// Drop atoms whose normalized log-weight is below max - log_window and
// renormalize. log_window must already include the worst-case log-density
// spread of the evaluation points (see prune_log_window).
PosteriorAtoms prune_atoms(const PosteriorAtoms& atoms, double log_window);

// Safe pruning window for evaluating observables on the given datasets:
// 34 + sum_c max|x_c| * width(mean_range(c)), so a dropped atom can change
// any per-point mixture density by at most ~e^-34 relatively.
double prune_log_window(const Model& model,
                        std::span<const Dataset* const> datasets);

}  // namespace slt
