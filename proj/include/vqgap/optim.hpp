#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "vqgap/rng.hpp"

namespace vqgap {

using Objective = std::function<double(const std::vector<double>&)>;

struct OptimResult {
  std::vector<double> best_x;
  double best_f = 0.0;
  std::size_t n_evals = 0;
  std::size_t n_iterations = 0;
  bool converged = false;  // stopped by ftol rather than budget
};

struct NelderMeadOptions {
  std::size_t max_evals = 200;
  double ftol = 0.0;  // stop when a full iteration improves the best value by less; 0 disables
  double initial_step = 0.8;
  double reflect = 1.0;
  double expand = 2.0;
  double contract = 0.5;
  double shrink = 0.5;
};

/// Downhill simplex minimization. Every objective call counts against
/// max_evals; the budget may cut an iteration short. Returns the best point
/// seen across all evaluations.
inline OptimResult nelder_mead(const Objective& f, const std::vector<double>& x0,
                               const NelderMeadOptions& opt = {}) {
  const std::size_t dim = x0.size();
  if (dim == 0) throw std::invalid_argument("nelder_mead: empty initial point");
  if (opt.max_evals == 0) throw std::invalid_argument("nelder_mead: max_evals must be >= 1");

  OptimResult res;
  res.best_f = std::numeric_limits<double>::infinity();

  auto eval = [&](const std::vector<double>& x) {
    const double v = f(x);
    ++res.n_evals;
    if (v < res.best_f) {
      res.best_f = v;
      res.best_x = x;
    }
    return v;
  };
  auto budget_left = [&] { return res.n_evals < opt.max_evals; };

  std::vector<std::vector<double>> xs(dim + 1, x0);
  std::vector<double> fs(dim + 1, std::numeric_limits<double>::infinity());
  for (std::size_t i = 1; i <= dim; ++i) xs[i][i - 1] += opt.initial_step;
  for (std::size_t i = 0; i <= dim && budget_left(); ++i) fs[i] = eval(xs[i]);

  std::vector<std::size_t> order(dim + 1);
  std::vector<double> centroid(dim), xr(dim), xe(dim), xc(dim);

  while (budget_left()) {
    ++res.n_iterations;
    const double best_before = res.best_f;

    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    const std::size_t ibest = order[0];
    const std::size_t iworst = order[dim];
    const std::size_t isecond = order[dim - 1];

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t d = 0; d < dim; ++d) centroid[d] += xs[order[r]][d];
    for (double& v : centroid) v /= static_cast<double>(dim);

    for (std::size_t d = 0; d < dim; ++d)
      xr[d] = centroid[d] + opt.reflect * (centroid[d] - xs[iworst][d]);
    const double fr = eval(xr);

    if (fr < fs[ibest]) {
      if (budget_left()) {
        for (std::size_t d = 0; d < dim; ++d)
          xe[d] = centroid[d] + opt.expand * (xr[d] - centroid[d]);
        const double fe = eval(xe);
        if (fe < fr) {
          xs[iworst] = xe;
          fs[iworst] = fe;
        } else {
          xs[iworst] = xr;
          fs[iworst] = fr;
        }
      } else {
        xs[iworst] = xr;
        fs[iworst] = fr;
      }
    } else if (fr < fs[isecond]) {
      xs[iworst] = xr;
      fs[iworst] = fr;
    } else if (budget_left()) {
      const bool outside = fr < fs[iworst];
      const std::vector<double>& towards = outside ? xr : xs[iworst];
      for (std::size_t d = 0; d < dim; ++d)
        xc[d] = centroid[d] + opt.contract * (towards[d] - centroid[d]);
      const double fc = eval(xc);
      if (fc < (outside ? fr : fs[iworst])) {
        xs[iworst] = xc;
        fs[iworst] = fc;
      } else {
        for (std::size_t r = 1; r <= dim && budget_left(); ++r) {
          const std::size_t i = order[r];
          for (std::size_t d = 0; d < dim; ++d)
            xs[i][d] = xs[ibest][d] + opt.shrink * (xs[i][d] - xs[ibest][d]);
          fs[i] = eval(xs[i]);
        }
      }
    }

    if (opt.ftol > 0.0 && best_before - res.best_f < opt.ftol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

struct SpsaOptions {
  std::size_t max_evals = 200;
  double ftol = 0.0;  // stop when one step improves the best value by less; 0 disables
  double step_gain = 0.3;         // a
  double perturbation = 0.2;      // c
  double gain_decay = 0.602;      // exponent on the step schedule
  double perturbation_decay = 0.101;
  double stability_offset = 10.0;  // A
  std::uint64_t seed = 1;
};

/// Simultaneous-perturbation stochastic approximation: two objective calls
/// per step with a Rademacher direction. Suited to noisy objectives in
/// higher dimension.
inline OptimResult spsa(const Objective& f, const std::vector<double>& x0,
                        const SpsaOptions& opt = {}) {
  const std::size_t dim = x0.size();
  if (dim == 0) throw std::invalid_argument("spsa: empty initial point");
  if (opt.max_evals == 0) throw std::invalid_argument("spsa: max_evals must be >= 1");

  OptimResult res;
  res.best_f = std::numeric_limits<double>::infinity();
  auto eval = [&](const std::vector<double>& x) {
    const double v = f(x);
    ++res.n_evals;
    if (v < res.best_f) {
      res.best_f = v;
      res.best_x = x;
    }
    return v;
  };

  std::mt19937_64 rng(mix_seed(opt.seed, 0x5b5a));
  std::vector<double> theta = x0;
  std::vector<double> delta(dim), plus(dim), minus(dim);

  if (res.n_evals < opt.max_evals) eval(theta);

  for (std::size_t k = 0; res.n_evals + 2 <= opt.max_evals; ++k) {
    ++res.n_iterations;
    const double best_before = res.best_f;
    const double kk = static_cast<double>(k) + 1.0;
    const double ak = opt.step_gain / std::pow(kk + opt.stability_offset, opt.gain_decay);
    const double ck = opt.perturbation / std::pow(kk, opt.perturbation_decay);

    for (std::size_t d = 0; d < dim; ++d) {
      delta[d] = (rng() & 1ULL) ? 1.0 : -1.0;
      plus[d] = theta[d] + ck * delta[d];
      minus[d] = theta[d] - ck * delta[d];
    }
    const double fp = eval(plus);
    const double fm = eval(minus);
    const double scale = (fp - fm) / (2.0 * ck);
    for (std::size_t d = 0; d < dim; ++d) theta[d] -= ak * scale / delta[d];

    if (opt.ftol > 0.0 && best_before - res.best_f < opt.ftol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace vqgap
