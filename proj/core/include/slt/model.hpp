#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slt/errors.hpp"

namespace slt {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

// Axis-aligned parameter box W.
struct Box {
  std::vector<Interval> dims;
  int dim() const { return static_cast<int>(dims.size()); }
  bool contains(std::span<const double> w) const;
  double volume() const;
};

// i.i.d. sample from the true distribution; points stored row-major.
struct Dataset {
  int n = 0;
  int dim = 0;
  std::vector<double> x;  // n * dim
  std::span<const double> point(int i) const {
    return {x.data() + static_cast<size_t>(i) * dim, static_cast<size_t>(dim)};
  }
};

// Per-model theory constants. nu may be unknown (measured, never asserted);
// q_constant is present only for the anomalous-rate model.
struct TheoryCard {
  double lambda = 0.0;
  std::optional<double> nu;
  int multiplicity = 1;
  double l0 = 0.0;
  double kappa = 1.0;  // learning-curve rate exponent
  std::optional<double> q_constant;
  std::string derivation_note;
};

// Predicted expectations of the six observables at (beta, n). Fields are
// absent when the card lacks a needed constant; the Gibbs sum offset
// 2*lambda/(beta*n) (kappa=1) resp. -Q/n^(2/3) (kappa=2/3) is always served.
struct PredictedObservables {
  std::optional<double> bg, bt, gg, gt, yg, yt;
  double gg_plus_gt_minus_2l0 = 0.0;
  double l0 = 0.0;
};

PredictedObservables theory_predict(const TheoryCard& card, double beta,
                                    double n);
// Throws MissingConstantError unless all six predictions are present.
void require_full(const PredictedObservables& p);

struct FisherPair {
  int d = 0;
  std::array<double, 4> i{};  // row-major d x d
  std::array<double, 4> j{};
  double nu_regular() const;  // tr(I J^{-1}) / 2
};

// The built-in model zoo: unit-covariance Gaussian location families
// x | w ~ N(mean_param(w), I_N) with a uniform prior on the parameter box.
// All closed forms below are exact.
class Model {
 public:
  enum class Kind { Regular1d, SingularAB, NonrenormA };

  static const Model& by_id(std::string_view id);  // ConfigError if unknown
  static const std::vector<std::string>& ids();

  const std::string& id() const { return id_; }
  Kind kind() const { return kind_; }
  int dim_x() const { return dim_x_; }
  int dim_w() const { return dim_w_; }
  const Box& param_box() const { return box_; }
  const TheoryCard& theory() const { return card_; }
  std::span<const double> w0() const {
    return {w0_.data(), static_cast<size_t>(dim_w_)};
  }

  // Gaussian mean map mu(w); out must have dim_x() slots.
  void mean_param(std::span<const double> w, std::span<double> out) const;
  // Range of each mean coordinate over the box (used for pruning bounds).
  Interval mean_range(int coord) const;

  double log_p(std::span<const double> x, std::span<const double> w) const;
  double log_q(std::span<const double> x) const;
  double entropy() const { return entropy_; }  // S = -E[log q]
  double l0() const { return card_.l0; }
  double loss(std::span<const double> w) const;  // L(w) = L0 + kl_true(w)
  // L as a function of the mean parameter (well defined for this zoo).
  double loss_from_mean(std::span<const double> mu) const;

  // f(x, w) = log p0(x) - log p(x|w). Throws std::domain_error outside W.
  double log_density_ratio(std::span<const double> x,
                           std::span<const double> w) const;
  // L(w) - L0 >= 0. Throws std::domain_error outside W.
  double kl_true(std::span<const double> w) const;
  // D(p0 || p_w).
  double kl_from_p0(std::span<const double> w) const;

  Dataset sample_true(int n, std::uint64_t seed) const;

  // d(mu)/d(w), row-major dim_x x dim_w; used by the Fisher estimator.
  void mean_jacobian(std::span<const double> w, std::span<double> out) const;

 private:
  Model(Kind kind, std::string id, int dim_x, int dim_w, Box box,
        double entropy, TheoryCard card, std::vector<double> w0);
  void check_in_box(std::span<const double> w) const;

  Kind kind_;
  std::string id_;
  int dim_x_;
  int dim_w_;
  Box box_;
  double entropy_;
  TheoryCard card_;
  std::vector<double> w0_;
};

// Monte Carlo I = E[grad log p . grad log p^T] over mc_budget draws from q,
// finite-difference J = hess L(w0). Throws SingularFisherError when the
// smallest eigenvalue of J is below 1e-6.
FisherPair fisher_pair(const Model& model, std::span<const double> w0,
                       long mc_budget, std::uint64_t seed);

// Diagnostic for the renormalizability definition: min over a dense grid of
// {w : 0 < D(p0||p_w) <= eps} of (L(w) - L0) / D(p0||p_w). The grid spans the
// smallest axis-aligned box enclosing W_eps with grid_per_dim points per
// dimension, so the reported minimum tracks inf over the ball as eps shrinks.
double renormalizability_ratio(const Model& model, double eps,
                               int grid_per_dim = 10000);

}  // namespace slt
