#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "slt/math.hpp"
#include "slt/observables.hpp"
#include "slt/posterior.hpp"

namespace slt {

struct ExperimentConfig {
  std::string model_id = "regular1d";
  double beta = 1.0;
  std::vector<int> n_grid = {100, 200, 400, 800};
  int replications = 400;
  McmcSettings mcmc;
  int test_size = 10000;
  std::uint64_t master_seed = 1;
  bool use_quadrature_oracle = true;
  int quadrature_nodes_per_dim = 0;  // 0 = per-dimension default
  int threads = 0;                   // 0 = hardware concurrency
  void validate() const;             // throws ConfigError
};

struct ReplicationRow {
  int n = 0;
  int rep = 0;
  ObservableSet obs;
  double ess_min = 0.0;      // NaN for the quadrature oracle
  double accept_rate = 0.0;  // NaN for the quadrature oracle
};

struct AggregateStat {
  double mean = 0.0;
  double se = 0.0;
};

// Per-n means and standard errors (sd / sqrt(R)). The three combination
// columns are aggregated from per-replication values so their SEs carry the
// within-replication correlations.
struct AggregateRow {
  int n = 0;
  int reps = 0;
  AggregateStat bg, bt, gg, gt, yg, yt, vt, waic;
  AggregateStat gg_plus_gt;  // Gibbs sum (lambda estimator numerator)
  AggregateStat state1;      // Bg - Bt - beta*Yt
  AggregateStat state2;      // Gg - Gt - beta*Yt
};

struct AggregateTable {
  std::string model_id;
  double beta = 1.0;
  std::vector<AggregateRow> rows;
  const AggregateRow& row_for(int n) const;
};

struct RunResult {
  AggregateTable table;
  std::vector<ReplicationRow> replications;
};

using ProgressFn = std::function<void(const std::string&)>;

// Replicated experiment over the n grid. Deterministic given the config:
// each (n, r) task derives its own dataset / test-set / sampler streams, and
// results are reduced in (n, r) order regardless of scheduling. A replication
// whose sampler fails mixing is retried once with doubled budgets; a second
// failure aborts with ExperimentAborted.
RunResult run_experiment(const ExperimentConfig& cfg,
                         const ProgressFn& progress = {});

// lambda_hat = (beta n / 2)(Gg + Gt - 2 L0) per n, pooled over the grid with
// inverse-variance weights.
Estimate estimate_lambda(const AggregateTable& table, double l0, double beta);
// nu_hat = (beta/2) n Yt per n, pooled likewise.
Estimate estimate_nu(const AggregateTable& table, double beta);

enum class ObservableId { Bg, Bt, Gg, Gt, Yg, Yt, Vt, Waic };

// OLS of log|mean - l0| on log n; returns kappa_hat = -slope with the SE
// propagated through the regression coefficients. Throws
// std::invalid_argument when mean - l0 changes sign over the grid.
Estimate fit_exponent(const AggregateTable& table, ObservableId which,
                      double l0);

struct StateResiduals {
  std::vector<int> n;
  std::vector<Estimate> r1;  // n^kappa (Bg - Bt - beta Yt)
  std::vector<Estimate> r2;  // n^kappa (Gg - Gt - beta Yt)
};
StateResiduals check_state_equations(const AggregateTable& table, double beta,
                                     double kappa);

// Slope of log Vt_hat on log n.
Estimate check_vt_growth(const AggregateTable& table);

struct FitResult {
  Estimate kappa;     // from Gg by default
  Estimate lambda;
  Estimate nu;
  Estimate vt_slope;
  StateResiduals state;
  std::string note;
};

FitResult fit_all(const AggregateTable& table, const TheoryCard& card,
                  double beta);

// Per-run theory checks recorded in fits.json.
struct CheckResult {
  std::string name;
  double value = 0.0;
  double se = 0.0;
  double target = 0.0;
  std::string criterion;  // human-readable tolerance description
  bool pass = false;
  bool asserted = true;  // false = report-only line
};

std::vector<CheckResult> evaluate_model_checks(const Model& model,
                                               const AggregateTable& table,
                                               const FitResult& fit,
                                               double beta);

// Inverse-variance pool of n^power * (mean - offset) across the grid.
Estimate pooled_scaled_offset(const AggregateTable& table, ObservableId which,
                              double offset, double power);

}  // namespace slt
