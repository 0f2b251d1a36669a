#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "slt/math.hpp"
#include "slt/posterior.hpp"
#include "slt/rng.hpp"

namespace slt {

namespace {

// Sufficient statistics of the log-likelihood for the Gaussian location
// family: sum_i log p(x_i|w) = const(data) + n * (xbar . mu(w) - |mu(w)|^2/2).
struct LogKernel {
  const Model* model;
  double beta_n;
  double xbar[2];

  LogKernel(const Model& m, const Dataset& d, double beta) : model(&m) {
    beta_n = beta * d.n;
    xbar[0] = xbar[1] = 0.0;
    for (int i = 0; i < d.n; ++i) {
      auto p = d.point(i);
      for (int c = 0; c < d.dim; ++c) xbar[c] += p[c];
    }
    for (int c = 0; c < d.dim; ++c) xbar[c] /= d.n;
  }

  double operator()(std::span<const double> w) const {
    if (!model->param_box().contains(w))
      return -std::numeric_limits<double>::infinity();
    double mu[2];
    model->mean_param(w, {mu, static_cast<size_t>(model->dim_x())});
    double v = 0.0;
    for (int c = 0; c < model->dim_x(); ++c)
      v += xbar[c] * mu[c] - 0.5 * mu[c] * mu[c];
    return beta_n * v;
  }
};

// Biased (1/S) autocovariance at the given lag.
double autocov(std::span<const double> x, double mean, int lag) {
  double s = 0.0;
  const int n = static_cast<int>(x.size());
  for (int i = 0; i + lag < n; ++i) s += (x[i] - mean) * (x[i + lag] - mean);
  return s / n;
}

}  // namespace

void McmcSettings::validate() const {
  if (!(beta > 0.0)) throw std::invalid_argument("mcmc: beta must be > 0");
  if (n_chains < 2) throw std::invalid_argument("mcmc: need at least 2 chains");
  if (burn_in < 0 || kept_per_chain < 1 || thin < 1)
    throw std::invalid_argument("mcmc: nonpositive budget");
  if (static_cast<long>(kept_per_chain) * n_chains < 500)
    throw std::invalid_argument("mcmc: kept_per_chain * n_chains must be >= 500");
  if (!(target_accept > 0.0 && target_accept < 1.0))
    throw std::invalid_argument("mcmc: target_accept must be in (0,1)");
  if (!(init_jitter >= 0.0))
    throw std::invalid_argument("mcmc: init_jitter must be >= 0");
}

double McmcDiagnostics::ess_min() const {
  double m = std::numeric_limits<double>::infinity();
  for (double e : ess) m = std::min(m, e);
  return m;
}

double McmcDiagnostics::rhat_max() const {
  double m = 0.0;
  for (double r : split_rhat) m = std::max(m, r);
  return m;
}

TraceDiag trace_diagnostics(std::span<const double> values, int n_chains) {
  const int total = static_cast<int>(values.size());
  if (n_chains < 1 || total % n_chains != 0)
    throw std::invalid_argument("trace_diagnostics: bad chain layout");
  const int per = total / n_chains;
  const int half = per / 2;
  if (half < 4) throw std::invalid_argument("trace_diagnostics: chains too short");
  const int m = 2 * n_chains;  // split chains

  std::vector<std::span<const double>> seq;
  seq.reserve(m);
  for (int c = 0; c < n_chains; ++c) {
    const double* base = values.data() + static_cast<size_t>(c) * per;
    seq.push_back({base, static_cast<size_t>(half)});
    seq.push_back({base + half, static_cast<size_t>(half)});
  }

  std::vector<double> means(m), vars(m);
  for (int k = 0; k < m; ++k) {
    const auto mv = mean_var(seq[k]);
    means[k] = mv.mean;
    vars[k] = mv.var;
  }
  double w = 0.0;
  for (double v : vars) w += v;
  w /= m;
  const auto bm = mean_var(means);
  const double b = half * bm.var;
  const double var_plus = (half - 1.0) / half * w + b / half;

  TraceDiag out;
  out.mean = 0.0;
  for (double mu : means) out.mean += mu;
  out.mean /= m;
  out.var_plus = var_plus;
  if (var_plus <= 0.0) {
    // constant trace: treat as perfectly mixed
    out.rhat = 1.0;
    out.ess = static_cast<double>(total);
    return out;
  }
  out.rhat = w > 0.0 ? std::sqrt(var_plus / w)
                     : std::numeric_limits<double>::infinity();

  // Geyer initial-monotone pairs on the multi-chain rho estimates
  // (rho_0 is 1 by definition).
  auto rho = [&](int t) {
    if (t == 0) return 1.0;
    double c = 0.0;
    for (int k = 0; k < m; ++k) c += autocov(seq[k], means[k], t);
    c /= m;
    return 1.0 - (w - c) / var_plus;
  };
  double tau = -1.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (int k = 0; 2 * k + 1 < half; ++k) {
    double pair = rho(2 * k) + rho(2 * k + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);
    prev_pair = pair;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1e-12);
  out.ess = std::min(static_cast<double>(total), total / tau);
  return out;
}

double mcmc_se(const PosteriorDraws& d,
               const std::function<double(std::span<const double>)>& g) {
  std::vector<double> trace(d.count());
  for (int i = 0; i < d.count(); ++i) trace[i] = g(d.draw(i));
  const auto td = trace_diagnostics(trace, d.n_chains);
  if (td.var_plus <= 0.0) return 0.0;
  return std::sqrt(td.var_plus / td.ess);
}

PosteriorDraws run_mcmc(const Model& model, const Dataset& data,
                        const McmcSettings& settings, std::uint64_t seed) {
  settings.validate();
  if (data.n < 1) throw std::invalid_argument("run_mcmc: dataset is empty");
  if (data.dim != model.dim_x())
    throw std::invalid_argument("run_mcmc: dataset dimension mismatch");

  const int d = model.dim_w();
  const LogKernel kernel(model, data, settings.beta);
  const Box& box = model.param_box();

  PosteriorDraws out;
  out.dim_w = d;
  out.n_chains = settings.n_chains;
  out.kept_per_chain = settings.kept_per_chain;
  out.beta = settings.beta;
  out.draws.resize(static_cast<size_t>(settings.n_chains) *
                   settings.kept_per_chain * d);
  out.diag.accept_rate.resize(settings.n_chains);

  double min_width = box.dims[0].width();
  for (const auto& iv : box.dims) min_width = std::min(min_width, iv.width());

  for (int chain = 0; chain < settings.n_chains; ++chain) {
    RngStream rng(derive_seed(seed, 0, chain, StreamKind::chain));
    std::vector<double> w(d), prop(d);
    for (int attempt = 0;; ++attempt) {
      for (int j = 0; j < d; ++j)
        w[j] = model.w0()[j] + settings.init_jitter * rng.uniform(-1.0, 1.0);
      if (box.contains(w)) break;
      if (attempt > 1000)
        throw std::invalid_argument("run_mcmc: init_jitter cannot place chains in the box");
    }
    double lk = kernel(w);
    double log_step = std::log(0.25 * min_width);
    const double lo_step = std::log(1e-8 * min_width);
    const double hi_step = std::log(10.0 * min_width);

    auto do_step = [&](double step) {
      for (int j = 0; j < d; ++j) prop[j] = w[j] + step * rng.gaussian();
      const double lp = kernel(prop);
      // draw the acceptance uniform unconditionally to keep the stream
      // layout independent of the accept/reject pattern
      const double u = rng.uniform01();
      if (std::log(u) < lp - lk) {
        w = prop;
        lk = lp;
        return true;
      }
      return false;
    };

    for (int t = 1; t <= settings.burn_in; ++t) {
      const bool acc = do_step(std::exp(log_step));
      const double gamma = 1.0 / std::pow(static_cast<double>(t), 0.6);
      log_step += gamma * ((acc ? 1.0 : 0.0) - settings.target_accept);
      log_step = std::clamp(log_step, lo_step, hi_step);
    }

    const double step = std::exp(log_step);  // frozen
    long accepted = 0, proposed = 0;
    double* dst = out.draws.data() +
                  static_cast<size_t>(chain) * settings.kept_per_chain * d;
    for (int k = 0; k < settings.kept_per_chain; ++k) {
      for (int s = 0; s < settings.thin; ++s) {
        accepted += do_step(step) ? 1 : 0;
        ++proposed;
      }
      for (int j = 0; j < d; ++j) dst[static_cast<size_t>(k) * d + j] = w[j];
    }
    out.diag.accept_rate[chain] =
        static_cast<double>(accepted) / static_cast<double>(proposed);
  }

  // Pooled split-chain diagnostics per coordinate.
  out.diag.ess.resize(d);
  out.diag.split_rhat.resize(d);
  std::vector<double> trace(out.count());
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < out.count(); ++i)
      trace[i] = out.draws[static_cast<size_t>(i) * d + j];
    const auto td = trace_diagnostics(trace, settings.n_chains);
    out.diag.ess[j] = td.ess;
    out.diag.split_rhat[j] = td.rhat;
  }
  for (int j = 0; j < d; ++j) {
    if (out.diag.ess[j] < 100.0 || out.diag.split_rhat[j] > 1.1) {
      std::ostringstream msg;
      msg << "run_mcmc: chains did not mix on coordinate " << j
          << " (pooled ESS " << out.diag.ess[j] << ", split-Rhat "
          << out.diag.split_rhat[j] << "); enlarge burn_in/kept_per_chain";
      throw NonMixingError(msg.str());
    }
  }
  return out;
}

}  // namespace slt
