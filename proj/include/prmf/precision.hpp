#pragma once

#include "prmf/errors.hpp"
#include "prmf/symmetric_sparse.hpp"
#include "prmf/types.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace prmf {

// Entrywise proximal operator of lambda * |.|_1. Dead-zone entries are exact zeros.
template <typename Derived>
typename Derived::PlainObject soft_threshold(const Eigen::MatrixBase<Derived>& a, typename Derived::Scalar lambda) {
  using Scalar = typename Derived::Scalar;
  if (lambda < Scalar(0)) throw UsageError("soft_threshold: lambda must be >= 0");
  return a.unaryExpr([lambda](Scalar x) {
    if (x > lambda) return x - lambda;
    if (x < -lambda) return x + lambda;
    return Scalar(0);
  });
}

// Applies (W W^T / rho + I)^{-1} through the identity
//   I - (1/rho) W (I + W^T W / rho)^{-1} W^T,
// so only the r x r core is ever factorized and no m x m matrix is formed.
template <typename Scalar>
class WoodburyApplicator {
 public:
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  WoodburyApplicator(FactorMatrixT<Scalar> w, Scalar rho) : w_(std::move(w)), rho_(rho) {
    if (!(rho > Scalar(0))) throw UsageError("woodbury: rho must be > 0");
    if (!w_.allFinite()) throw NumericError("woodbury: non-finite low-rank factor");
    Dense core = Dense::Identity(w_.cols(), w_.cols());
    core.noalias() += (w_.transpose() * w_) / rho_;
    core_.compute(core);
    if (core_.info() != Eigen::Success) throw NumericError("woodbury: core matrix is not positive definite");
  }

  Index rows() const noexcept { return w_.rows(); }
  Index rank() const noexcept { return w_.cols(); }
  Scalar rho() const noexcept { return rho_; }
  const FactorMatrixT<Scalar>& factor() const noexcept { return w_; }

  template <typename Derived>
  Dense apply(const Eigen::MatrixBase<Derived>& m) const {
    if (m.rows() != w_.rows()) throw UsageError("woodbury: right-hand side has the wrong row count");
    Dense out = m;
    if (w_.cols() == 0) return out;
    Dense projected = w_.transpose() * m;
    out.noalias() -= (w_ * core_.solve(projected)) / rho_;
    return out;
  }

 private:
  FactorMatrixT<Scalar> w_;
  Scalar rho_;
  Eigen::LLT<Dense> core_;
};

template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> woodbury_apply(const FactorMatrixT<Scalar>& w, Scalar rho,
                                                                     const Eigen::MatrixBase<Derived>& m) {
  return WoodburyApplicator<Scalar>(w, rho).apply(m);
}

// Symmetric selection: each pair keeps whichever of (i,k), (k,i) has the
// smaller magnitude; ties keep the (i,k) entry with i < k. Zeros are dropped.
template <typename Derived>
SymmetricSparse<typename Derived::Scalar> symmetrize(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() != a.cols()) throw UsageError("symmetrize: matrix not square");
  std::vector<SymmetricEntry<Scalar>> entries;
  for (Index k = 0; k < a.cols(); ++k)
    for (Index i = 0; i <= k; ++i) {
      const Scalar ik = a(i, k);
      const Scalar ki = a(k, i);
      const Scalar v = std::abs(ik) <= std::abs(ki) ? ik : ki;
      if (v != Scalar(0)) entries.push_back({int(i), int(k), v});
    }
  return SymmetricSparse<Scalar>(int(a.rows()), std::move(entries));
}

struct AdmmSettings {
  double lambda_u = 0.0;
  double alpha = 1.0;
  double tau = 0.0;
  double rho = 100.0;
  int iterations = 30;
};

struct AdmmIterationLog {
  int iteration = 0;  // 1-based: state after this many updates
  double primal_residual = 0.0;
  double l1 = 0.0;
  std::size_t nonzeros = 0;
};

std::string format_log_line(const AdmmIterationLog& rec);

struct AdmmResult {
  Eigen::MatrixXd theta;  // Theta^K, exactly sparse, not symmetrized
  Eigen::MatrixXd z;
  Eigen::MatrixXd y;
  double primal_residual = 0.0;  // |Theta^K - Z^K|_F
  std::vector<AdmmIterationLog> log;
};

// K iterations from Z^0 = theta_init, Y^0 = 0, with C = W W^T and
// E = I - (lambda_u/alpha) C:
//   Theta <- soft(Z - Y, tau/rho)
//   Z     <- (C/rho + I)^{-1} (E/rho + Theta + Y)
//   Y     <- Y + Theta - Z
// Throws DivergenceError (step = iteration) on a non-finite iterate.
AdmmResult admm_solve(const FactorMatrix& w, const AdmmSettings& settings, const Eigen::MatrixXd& theta_init);

// Smooth-plus-l1 objective the iteration above descends:
//   1/2 tr(Theta^T C Theta) - tr(E Theta) + tau |Theta|_1.
double clime_objective(const FactorMatrix& w, double lambda_u_over_alpha, double tau, const Eigen::MatrixXd& theta);

struct AugmentedFactors {
  FactorMatrix w;  // C = w w^T
  double tau = 0.0;
};

// beta == 0: w = U / sqrt(d), tau = gamma / d.
// beta > 0:  w = [U, sqrt(beta) X] / sqrt(d + beta), tau = gamma / (d + beta).
AugmentedFactors augment_factors(const FactorMatrix& u, const FactorMatrix* x, double beta, double gamma);

struct ThetaPhaseResult {
  PrecisionMatrix theta;
  double sparsity = 0.0;
  double primal_residual = 0.0;
  double min_entry = 0.0;
  double max_entry = 0.0;
  std::vector<AdmmIterationLog> log;
};

// Builds W and tau, runs admm_solve warm-started from `current`, then symmetrizes.
ThetaPhaseResult theta_phase(const FactorMatrix& u, const FactorMatrix* x, const HyperParams& params,
                             const PrecisionMatrix& current);

}  // namespace prmf
