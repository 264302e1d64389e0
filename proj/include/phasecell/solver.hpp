#pragma once

// Box-constrained minimisation of the discrete energy: projected gradient
// with Barzilai-Borwein steps and a nonmonotone (Grippo-style) safeguard.
// Deterministic: identical inputs give bit-identical outcomes.

#include <cstdint>
#include <vector>

#include "phasecell/field.hpp"
#include "phasecell/integrand.hpp"

namespace phasecell {

enum class BBVariant { BB1, BB2, Alternating };

struct SolverConfig {
  int max_iters = 10000;
  // projected-gradient sup-norm threshold, relative to the energy scale
  double tol_pg_rel = 1e-6;
  // relative energy decrease threshold over the trailing window
  double tol_rel = 1e-9;
  int decrease_window = 20;
  BBVariant bb_variant = BBVariant::Alternating;
  int nonmonotone_window = 10;
  int restarts = 1;
  double perturbation = 0.02;
  double sufficient_decrease = 1e-4;
  double step_lo_factor = 1e-10;  // times h^2
  double step_hi_factor = 1e10;   // times h^2
};

struct SolveOutcome {
  ScalarField field;
  double energy = 0.0;
  int iterations = 0;
  bool converged = false;
  double pg_norm = 0.0;
  int restarts_used = 1;
  // absolute projected-gradient threshold used (tol_pg_rel * energy scale)
  double tol_pg_abs = 0.0;
};

// Minimises from F0; iterates stay in [0,1], clamped nodes are never touched,
// the final energy never exceeds the initial one.
SolveOutcome minimise(const Integrand& f, const ScalarField& F0, double eps,
                      const SolverConfig& cfg);

// Best of cfg.restarts runs; restart r > 0 perturbs F0 by a deterministic
// pseudorandom field of amplitude cfg.perturbation seeded by r, re-projected
// and re-clamped. Restart 0 is F0 itself, so the result never loses to a
// plain minimise.
SolveOutcome multi_start(const Integrand& f, const ScalarField& F0, double eps,
                         const SolverConfig& cfg);

}  // namespace phasecell
