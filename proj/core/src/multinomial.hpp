#pragma once

// Penalized multinomial logistic regression softmax(W x + b) over a fixed
// feature matrix. Dirichlet calibration feeds it log-probabilities, matrix
// and vector scaling feed it logits.

#include <span>
#include <vector>

#include "dircal/core.hpp"
#include "dircal/optim.hpp"

namespace dircal::detail {

enum class WeightLayout {
  kFull,      // all k*k weights plus k intercepts, W row-major then b
  kDiagonal,  // k diagonal weights plus k intercepts
};

class MultinomialProblem {
 public:
  /// `features` is n x k; `w_penalty` (k x k) and `b_penalty` (k) hold the
  /// quadratic penalty coefficient of each parameter, so the objective is
  /// mean log-loss + sum(w_penalty .* W^2) + sum(b_penalty .* b^2).
  MultinomialProblem(Matrix features, std::vector<int> labels, WeightLayout layout,
                     Matrix w_penalty, Vector b_penalty);

  Index classes() const { return k_; }
  Index dimension() const;

  Vector pack(const Matrix& w, const Vector& b) const;
  void unpack(const Vector& theta, Matrix* w, Vector* b) const;

  double value(const Vector& theta, Vector* grad) const;
  Matrix hessian(const Vector& theta) const;

  /// Mean log-loss only, without the penalty.
  double mean_log_loss(const Matrix& w, const Vector& b) const;

  optim::Objective objective() const;

 private:
  // Row-wise class probabilities and per-row log-sum-exp for given params.
  Matrix probabilities(const Matrix& w, const Vector& b, double* mean_nll) const;

  Matrix features_;  // n x (k+1), last column ones
  std::vector<int> labels_;
  WeightLayout layout_;
  Matrix w_penalty_;
  Vector b_penalty_;
  Index k_;
};

/// Fits from the identity map (W = I, b = 0). Throws FitError if the
/// optimizer produced non-finite values.
optim::Result fit_multinomial(const MultinomialProblem& problem, const optim::Options& options);

}  // namespace dircal::detail
