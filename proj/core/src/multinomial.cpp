#include "multinomial.hpp"

#include <cmath>
#include <string>

namespace dircal::detail {

MultinomialProblem::MultinomialProblem(Matrix features, std::vector<int> labels,
                                       WeightLayout layout, Matrix w_penalty, Vector b_penalty)
    : labels_(std::move(labels)),
      layout_(layout),
      w_penalty_(std::move(w_penalty)),
      b_penalty_(std::move(b_penalty)),
      k_(features.cols()) {
  const Index n = features.rows();
  if (static_cast<std::size_t>(n) != labels_.size()) {
    throw InvalidInput("multinomial: feature rows and label count differ");
  }
  if (n == 0) {
    throw InvalidInput("multinomial: no training rows");
  }
  if (w_penalty_.rows() != k_ || w_penalty_.cols() != k_ || b_penalty_.size() != k_) {
    throw InvalidInput("multinomial: penalty shapes do not match the class count");
  }
  features_.resize(n, k_ + 1);
  features_.leftCols(k_) = features;
  features_.col(k_).setOnes();
}

Index MultinomialProblem::dimension() const {
  return layout_ == WeightLayout::kFull ? k_ * k_ + k_ : 2 * k_;
}

Vector MultinomialProblem::pack(const Matrix& w, const Vector& b) const {
  Vector theta(dimension());
  if (layout_ == WeightLayout::kFull) {
    for (Index i = 0; i < k_; ++i) {
      for (Index j = 0; j < k_; ++j) theta(i * k_ + j) = w(i, j);
    }
    theta.tail(k_) = b;
  } else {
    theta.head(k_) = w.diagonal();
    theta.tail(k_) = b;
  }
  return theta;
}

void MultinomialProblem::unpack(const Vector& theta, Matrix* w, Vector* b) const {
  if (layout_ == WeightLayout::kFull) {
    w->resize(k_, k_);
    for (Index i = 0; i < k_; ++i) {
      for (Index j = 0; j < k_; ++j) (*w)(i, j) = theta(i * k_ + j);
    }
  } else {
    *w = Matrix::Zero(k_, k_);
    w->diagonal() = theta.head(k_);
  }
  *b = theta.tail(k_);
}

Matrix MultinomialProblem::probabilities(const Matrix& w, const Vector& b, double* mean_nll) const {
  const Index n = features_.rows();
  // scores(i, c) = sum_j x_ij w_cj + b_c
  Matrix scores = features_.leftCols(k_) * w.transpose();
  scores.rowwise() += b.transpose();
  Matrix probs(n, k_);
  double nll = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double shift = scores.row(i).maxCoeff();
    const double lse = shift + std::log((scores.row(i).array() - shift).exp().sum());
    probs.row(i) = (scores.row(i).array() - lse).exp();
    nll += lse - scores(i, labels_[static_cast<std::size_t>(i)]);
  }
  if (mean_nll != nullptr) *mean_nll = nll / static_cast<double>(n);
  return probs;
}

double MultinomialProblem::mean_log_loss(const Matrix& w, const Vector& b) const {
  double nll = 0.0;
  probabilities(w, b, &nll);
  return nll;
}

double MultinomialProblem::value(const Vector& theta, Vector* grad) const {
  Matrix w;
  Vector b;
  unpack(theta, &w, &b);
  double nll = 0.0;
  Matrix probs = probabilities(w, b, &nll);
  double penalty = (w_penalty_.array() * w.array().square()).sum() +
                   (b_penalty_.array() * b.array().square()).sum();
  if (grad == nullptr) return nll + penalty;

  const Index n = features_.rows();
  for (Index i = 0; i < n; ++i) probs(i, labels_[static_cast<std::size_t>(i)]) -= 1.0;
  // Full gradient k x (k+1): residualᵀ X / n.
  Matrix full = probs.transpose() * features_ / static_cast<double>(n);
  Matrix gw = full.leftCols(k_) + 2.0 * (w_penalty_.array() * w.array()).matrix();
  Vector gb = full.col(k_) + 2.0 * (b_penalty_.array() * b.array()).matrix();
  *grad = pack(gw, gb);
  return nll + penalty;
}

Matrix MultinomialProblem::hessian(const Vector& theta) const {
  Matrix w;
  Vector b;
  unpack(theta, &w, &b);
  const Matrix probs = probabilities(w, b, nullptr);
  const Index n = features_.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  const Index dim = dimension();
  Matrix h = Matrix::Zero(dim, dim);

  if (layout_ == WeightLayout::kFull) {
    const Index d = k_ + 1;
    auto index = [&](Index c, Index f) { return f < k_ ? c * k_ + f : k_ * k_ + c; };
    for (Index c = 0; c < k_; ++c) {
      for (Index c2 = c; c2 < k_; ++c2) {
        Vector s = -probs.col(c).cwiseProduct(probs.col(c2));
        if (c == c2) s += probs.col(c);
        Matrix block = features_.transpose() * (features_.array().colwise() * s.array()).matrix();
        block *= inv_n;
        for (Index f = 0; f < d; ++f) {
          for (Index f2 = 0; f2 < d; ++f2) {
            h(index(c, f), index(c2, f2)) = block(f, f2);
            h(index(c2, f2), index(c, f)) = block(f, f2);
          }
        }
      }
    }
  } else {
    // Parameters of class c use feature c (diagonal weight) and the bias.
    for (Index c = 0; c < k_; ++c) {
      for (Index c2 = c; c2 < k_; ++c2) {
        double ww = 0.0, wb = 0.0, bw = 0.0, bb = 0.0;
        for (Index i = 0; i < n; ++i) {
          double s = -probs(i, c) * probs(i, c2);
          if (c == c2) s += probs(i, c);
          const double xc = features_(i, c);
          const double xc2 = features_(i, c2);
          ww += s * xc * xc2;
          wb += s * xc;
          bw += s * xc2;
          bb += s;
        }
        const Index wc = c, wc2 = c2, bc = k_ + c, bc2 = k_ + c2;
        h(wc, wc2) = h(wc2, wc) = ww * inv_n;
        h(wc, bc2) = h(bc2, wc) = wb * inv_n;
        h(bc, wc2) = h(wc2, bc) = bw * inv_n;
        h(bc, bc2) = h(bc2, bc) = bb * inv_n;
      }
    }
  }

  Vector pen = pack(w_penalty_, b_penalty_);
  h.diagonal() += 2.0 * pen;
  return h;
}

optim::Objective MultinomialProblem::objective() const {
  optim::Objective obj;
  obj.value = [this](const Vector& x, Vector* g) { return value(x, g); };
  obj.hessian = [this](const Vector& x) { return hessian(x); };
  return obj;
}

optim::Result fit_multinomial(const MultinomialProblem& problem, const optim::Options& options) {
  const Index k = problem.classes();
  Vector theta0 = problem.pack(Matrix::Identity(k, k), Vector::Zero(k));
  return optim::minimize(problem.objective(), std::move(theta0), options);
}

}  // namespace dircal::detail
