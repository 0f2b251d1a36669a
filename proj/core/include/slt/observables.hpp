#pragma once

#include "slt/model.hpp"
#include "slt/posterior.hpp"

namespace slt {

// One replication's observables, in nats. waic == bt + beta*yt exactly.
struct ObservableSet {
  int n = 0;
  double beta = 1.0;
  double bg = 0.0, bt = 0.0;
  double gg = 0.0, gt = 0.0;
  double yg = 0.0, yt = 0.0;
  double waic = 0.0;
  double vt() const { return n * yt; }
};

// -E_test[log <p(x|w)>], log-sum-exp over atoms per point.
double bayes_gen_loss(const Model& model, const PosteriorAtoms& post,
                      const Dataset& test);
// -(1/n) sum_i log <p(X_i|w)> on the training set.
double bayes_train_loss(const Model& model, const PosteriorAtoms& post,
                        const Dataset& train);
// <L(w)>: exact in x, posterior-weighted closed-form loss.
double gibbs_gen_loss(const Model& model, const PosteriorAtoms& post);
// <(1/n) sum_i -log p(X_i|w)>.
double gibbs_train_loss(const Model& model, const PosteriorAtoms& post,
                        const Dataset& train);
// Mean over points of the posterior variance of log p(X_i|w). Draw-based
// posteriors use the unbiased S-1 denominator; a single atom gives 0.
double functional_variance_train(const Model& model, const PosteriorAtoms& post,
                                 const Dataset& train);
double functional_variance_gen(const Model& model, const PosteriorAtoms& post,
                               const Dataset& test);
double waic(double bt, double yt, double beta);

// All of the above in one pass over each dataset.
ObservableSet compute_observables(const Model& model, const PosteriorAtoms& post,
                                  const Dataset& train, const Dataset& test,
                                  double beta);

}  // namespace slt
