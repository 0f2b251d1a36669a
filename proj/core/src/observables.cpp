#include "slt/observables.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "slt/math.hpp"

namespace slt {

namespace {

// For the Gaussian location zoo, log p(x|w) = base(x) + x.mu - |mu|^2/2 with
// base(x) = -(N/2) log 2pi - |x|^2/2, so per-point posterior functionals of
// log p reduce to weighted sums over t_j = x.mu_j - c_j.
struct AtomTable {
  int dim;
  int count;
  const double* mu;
  std::vector<double> c;   // |mu_j|^2 / 2
  std::vector<double> w;   // linear weights
  const double* log_w;
  double var_correction;   // S/(S-1) for draws, 1 for grids

  explicit AtomTable(const PosteriorAtoms& post)
      : dim(post.dim_mu),
        count(post.count()),
        mu(post.mu.data()),
        log_w(post.log_w.data()) {
    if (count < 1) throw std::invalid_argument("observables: empty posterior");
    c.resize(count);
    w.resize(count);
    for (int j = 0; j < count; ++j) {
      double q = 0.0;
      for (int k = 0; k < dim; ++k) {
        const double m = mu[static_cast<size_t>(j) * dim + k];
        q += m * m;
      }
      c[j] = 0.5 * q;
      w[j] = std::exp(post.log_w[j]);
    }
    var_correction = post.from_draws && count > 1
                         ? static_cast<double>(count) / (count - 1)
                         : 1.0;
  }
};

struct PointwiseSums {
  double bayes = 0.0;  // mean of -log<p>
  double gibbs = 0.0;  // mean of -<log p>
  double fvar = 0.0;   // mean of posterior variance of log p
};

PointwiseSums accumulate(const AtomTable& at, const Dataset& data) {
  if (data.n < 1) throw std::invalid_argument("observables: empty dataset");
  if (data.dim != at.dim)
    throw std::invalid_argument("observables: point/atom dimension mismatch");
  std::vector<double> t(at.count);
  double sum_lse = 0.0, sum_mean = 0.0, sum_var = 0.0;
  for (int i = 0; i < data.n; ++i) {
    const double* x = data.x.data() + static_cast<size_t>(i) * data.dim;
    double base = 0.0;
    for (int k = 0; k < data.dim; ++k) base += x[k] * x[k];
    base = -0.5 * at.dim * kLog2Pi - 0.5 * base;

    double mx = -std::numeric_limits<double>::infinity();
    double m1 = 0.0, m2 = 0.0;
    if (at.dim == 1) {
      const double x0 = x[0];
      for (int j = 0; j < at.count; ++j) {
        const double tj = x0 * at.mu[j] - at.c[j];
        t[j] = tj;
        m1 += at.w[j] * tj;
        m2 += at.w[j] * tj * tj;
        const double l = at.log_w[j] + tj;
        if (l > mx) mx = l;
      }
    } else {
      const double x0 = x[0], x1 = x[1];
      for (int j = 0; j < at.count; ++j) {
        const double tj =
            x0 * at.mu[2 * j] + x1 * at.mu[2 * j + 1] - at.c[j];
        t[j] = tj;
        m1 += at.w[j] * tj;
        m2 += at.w[j] * tj * tj;
        const double l = at.log_w[j] + tj;
        if (l > mx) mx = l;
      }
    }
    double se = 0.0;
    for (int j = 0; j < at.count; ++j)
      se += std::exp(at.log_w[j] + t[j] - mx);
    sum_lse += base + mx + std::log(se);
    sum_mean += base + m1;
    const double v = m2 - m1 * m1;
    sum_var += v > 0.0 ? v : 0.0;  // clamp fp negatives at degenerate atoms
  }
  PointwiseSums s;
  s.bayes = -sum_lse / data.n;
  s.gibbs = -sum_mean / data.n;
  s.fvar = at.count > 1 ? at.var_correction * sum_var / data.n : 0.0;
  return s;
}

}  // namespace

double bayes_gen_loss(const Model& model, const PosteriorAtoms& post,
                      const Dataset& test) {
  (void)model;
  return accumulate(AtomTable(post), test).bayes;
}

double bayes_train_loss(const Model& model, const PosteriorAtoms& post,
                        const Dataset& train) {
  (void)model;
  return accumulate(AtomTable(post), train).bayes;
}

double gibbs_gen_loss(const Model& model, const PosteriorAtoms& post) {
  (void)model;
  if (post.count() < 1) throw std::invalid_argument("observables: empty posterior");
  double s = 0.0;
  for (int j = 0; j < post.count(); ++j)
    s += std::exp(post.log_w[j]) * post.loss[j];
  return s;
}

double gibbs_train_loss(const Model& model, const PosteriorAtoms& post,
                        const Dataset& train) {
  (void)model;
  return accumulate(AtomTable(post), train).gibbs;
}

double functional_variance_train(const Model& model, const PosteriorAtoms& post,
                                 const Dataset& train) {
  (void)model;
  return accumulate(AtomTable(post), train).fvar;
}

double functional_variance_gen(const Model& model, const PosteriorAtoms& post,
                               const Dataset& test) {
  (void)model;
  return accumulate(AtomTable(post), test).fvar;
}

double waic(double bt, double yt, double beta) { return bt + beta * yt; }

ObservableSet compute_observables(const Model& model, const PosteriorAtoms& post,
                                  const Dataset& train, const Dataset& test,
                                  double beta) {
  const AtomTable at(post);
  const PointwiseSums tr = accumulate(at, train);
  const PointwiseSums te = accumulate(at, test);
  ObservableSet o;
  o.n = train.n;
  o.beta = beta;
  o.bg = te.bayes;
  o.bt = tr.bayes;
  o.gg = gibbs_gen_loss(model, post);
  o.gt = tr.gibbs;
  o.yg = te.fvar;
  o.yt = tr.fvar;
  o.waic = waic(o.bt, o.yt, beta);
  return o;
}

}  // namespace slt
