#pragma once

// Deterministic descent for smooth convex objectives.

#include <cstddef>
#include <functional>
#include <vector>

#include "dircal/core.hpp"

namespace dircal::optim {

/// Smooth objective. `value` writes the gradient when `grad` is non-null.
/// `hessian` is optional; when present and the problem is small enough,
/// minimize() takes Newton steps.
struct Objective {
  std::function<double(const Vector& x, Vector* grad)> value;
  std::function<Matrix(const Vector& x)> hessian;
};

struct Options {
  double tolerance = 1e-8;  // on the gradient infinity-norm
  int max_iterations = 500;
  std::size_t newton_max_dimension = 2500;
  double armijo = 1e-4;
  double backtrack = 0.5;
  double initial_step = 1.0;
  int lbfgs_memory = 10;
};

struct Result {
  Vector params;
  double final_value = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
  /// Objective value at x0 and after every accepted step.
  std::vector<double> trace;
};

/// Line-search descent. Newton directions when a Hessian is supplied and the
/// dimension is at most `newton_max_dimension`, L-BFGS directions otherwise.
/// Accepted steps satisfy the Armijo condition, so the objective never
/// increases. Throws FitError if the objective turns non-finite at a
/// trial point that cannot be backtracked away from, or at x0.
Result minimize(const Objective& objective, Vector x0, const Options& options = {});

/// Golden-section search for the minimizer of a unimodal function on
/// [lo, hi]. Endpoints are evaluated too, so monotone functions return the
/// boundary exactly.
double minimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                       double tol = 1e-9);

}  // namespace dircal::optim
