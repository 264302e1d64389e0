#include "phasecell/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "phasecell/rng.hpp"

namespace phasecell {

namespace {

void project(std::vector<double>& x, const ScalarField& ref) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (ref.clamped[i]) x[i] = ref.datum[i];
    else x[i] = std::clamp(x[i], 0.0, 1.0);
  }
}

double projected_gradient_norm(const std::vector<double>& x,
                               const std::vector<double>& g,
                               const ScalarField& ref) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (ref.clamped[i]) continue;
    double stepped = std::clamp(x[i] - g[i], 0.0, 1.0);
    worst = std::max(worst, std::abs(x[i] - stepped));
  }
  return worst;
}

}  // namespace

SolveOutcome minimise(const Integrand& f, const ScalarField& F0, double eps,
                      const SolverConfig& cfg) {
  if (cfg.max_iters < 1) throw std::invalid_argument("minimise: max_iters >= 1");
  if (!(cfg.tol_pg_rel > 0.0) || !(cfg.tol_rel > 0.0))
    throw std::invalid_argument("minimise: tolerances must be > 0");
  if (!F0.satisfies_clamp(1e-14))
    throw std::invalid_argument("minimise: initial field violates its clamp");

  ScalarField field = F0;
  EnergyWorkspace ws = make_workspace(f, field.grid);

  SolveOutcome out;
  out.restarts_used = 1;

  const std::size_t nn = field.values.size();
  const double h = field.grid.h;
  const double amin = cfg.step_lo_factor * h * h;
  const double amax = cfg.step_hi_factor * h * h;

  double energy_now = energy_total(f, field, eps, ws);
  if (!std::isfinite(energy_now))
    throw std::runtime_error("minimise: non-finite initial energy");
  const double scale = std::max(1.0, std::abs(energy_now));
  const double tol_pg = cfg.tol_pg_rel * scale;
  out.tol_pg_abs = tol_pg;

  if (field.free_node_count() == 0) {
    out.field = field;
    out.energy = energy_now;
    out.converged = true;
    out.iterations = 0;
    out.pg_norm = 0.0;
    return out;
  }

  std::vector<double> grad, grad_prev(nn), x_prev(nn), trial(nn);
  energy_gradient_into(f, field, eps, ws, grad);

  // best-seen iterate; BB steps are nonmonotone
  std::vector<double> best_x = field.values;
  double best_energy = energy_now;
  double best_pg = projected_gradient_norm(field.values, grad, field);
  bool pg_converged = false;

  std::deque<double> recent{energy_now};
  std::deque<double> window{energy_now};
  double alpha = h * h;
  bool use_bb1 = true;
  int it = 0;

  for (; it < cfg.max_iters; ++it) {
    double pg = projected_gradient_norm(field.values, grad, field);
    if (energy_now <= best_energy) {
      best_energy = energy_now;
      best_x = field.values;
      best_pg = pg;
    }
    if (pg <= tol_pg) {
      out.converged = true;
      // return this iterate: re-solving from it terminates immediately
      pg_converged = true;
      best_energy = energy_now;
      best_x = field.values;
      best_pg = pg;
      break;
    }
    if (static_cast<int>(window.size()) > cfg.decrease_window) {
      double drop = window.front() - energy_now;
      if (drop >= 0.0 && drop <= cfg.tol_rel * scale) {
        out.converged = true;
        break;
      }
    }

    double eref = *std::max_element(recent.begin(), recent.end());
    x_prev = field.values;
    grad_prev = grad;

    double step = std::clamp(alpha, amin, amax);
    double energy_new = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t i = 0; i < nn; ++i) trial[i] = x_prev[i] - step * grad_prev[i];
      project(trial, field);
      field.values.swap(trial);
      energy_new = energy_total(f, field, eps, ws);
      double decr = 0.0;
      for (std::size_t i = 0; i < nn; ++i)
        decr += grad_prev[i] * (x_prev[i] - field.values[i]);
      if (!std::isfinite(energy_new))
        throw std::runtime_error("minimise: non-finite energy during line search");
      if (energy_new <= eref - cfg.sufficient_decrease * decr || step <= amin) break;
      field.values.swap(trial);  // back to the pre-step values
      step *= 0.5;
    }
    energy_now = energy_new;
    energy_gradient_into(f, field, eps, ws, grad);

    double sts = 0.0, sty = 0.0, yty = 0.0;
    for (std::size_t i = 0; i < nn; ++i) {
      double s = field.values[i] - x_prev[i];
      double y = grad[i] - grad_prev[i];
      sts += s * s;
      sty += s * y;
      yty += y * y;
    }
    double bb1 = (sty > 0.0) ? sts / sty : amax;
    double bb2 = (yty > 0.0 && sty > 0.0) ? sty / yty : amax;
    switch (cfg.bb_variant) {
      case BBVariant::BB1: alpha = bb1; break;
      case BBVariant::BB2: alpha = bb2; break;
      case BBVariant::Alternating: alpha = use_bb1 ? bb1 : bb2; use_bb1 = !use_bb1; break;
    }
    alpha = std::clamp(alpha, amin, amax);

    recent.push_back(energy_now);
    if (static_cast<int>(recent.size()) > cfg.nonmonotone_window) recent.pop_front();
    window.push_back(energy_now);
    if (static_cast<int>(window.size()) > cfg.decrease_window + 1) window.pop_front();
  }

  if (!pg_converged && energy_now <= best_energy) {
    best_energy = energy_now;
    best_x = field.values;
    best_pg = projected_gradient_norm(field.values, grad, field);
  }
  field.values = best_x;
  out.field = field;
  out.energy = energy_total(f, field, eps, ws);  // re-evaluated at the result
  out.iterations = it;
  out.pg_norm = best_pg;
  return out;
}

SolveOutcome multi_start(const Integrand& f, const ScalarField& F0, double eps,
                         const SolverConfig& cfg) {
  if (cfg.restarts < 1) throw std::invalid_argument("multi_start: restarts >= 1");
  SolveOutcome best;
  for (int r = 0; r < cfg.restarts; ++r) {
    ScalarField start = F0;
    if (r > 0) {
      Rng rng(static_cast<std::uint64_t>(r));
      for (std::size_t i = 0; i < start.values.size(); ++i) {
        if (start.clamped[i]) continue;
        start.values[i] =
            std::clamp(start.values[i] + cfg.perturbation * rng.symmetric(1.0), 0.0, 1.0);
      }
      start.enforce_clamp();
    }
    SolveOutcome outcome = minimise(f, start, eps, cfg);
    if (r == 0 || outcome.energy < best.energy) {
      best = outcome;
    }
  }
  best.restarts_used = cfg.restarts;
  return best;
}

}  // namespace phasecell
