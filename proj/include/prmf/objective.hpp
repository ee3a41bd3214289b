#pragma once

#include "prmf/errors.hpp"
#include "prmf/sparse_ratings.hpp"
#include "prmf/symmetric_sparse.hpp"
#include "prmf/types.hpp"

namespace prmf {

// Raw inner product U_i V_j^T; training residuals use this value.
template <typename DerivedU, typename DerivedV>
typename DerivedU::Scalar predict(const Eigen::MatrixBase<DerivedU>& user_row,
                                  const Eigen::MatrixBase<DerivedV>& item_row) {
  if (user_row.size() != item_row.size()) throw UsageError("predict: dimension mismatch");
  return user_row.derived().reshaped().dot(item_row.derived().reshaped());
}

// Inner product clamped into the rating range; used for reported predictions.
template <typename DerivedU, typename DerivedV>
typename DerivedU::Scalar predict(const Eigen::MatrixBase<DerivedU>& user_row,
                                  const Eigen::MatrixBase<DerivedV>& item_row, const RatingRange& range) {
  if (!(range.min < range.max)) throw UsageError("predict: rating_min must be below rating_max");
  return range.clamp(predict(user_row, item_row));
}

// 1/2 sum_D (R_ij - U_i V_j^T)^2 + lambda_u/2 |U|_F^2 + lambda_v/2 |V|_F^2.
double pmf_objective(const SparseRatings& ratings, const FactorMatrix& u, const FactorMatrix& v, double lambda_u,
                     double lambda_v);

// tr(U^T Theta U), touching only Theta's nonzeros.
double coupling_trace(const PrecisionMatrix& theta, const FactorMatrix& u);

// Objective of the latent-factor phase: pmf_objective + alpha/2 tr(U^T Theta U).
double latent_objective(const SparseRatings& ratings, const FactorMatrix& u, const FactorMatrix& v,
                        const PrecisionMatrix& theta, double lambda_u, double lambda_v, double alpha);

// log|Theta + shift I| by Cholesky. Throws NumericError when the shifted matrix is not PD.
double shifted_log_det(const PrecisionMatrix& theta, double shift);

// Individual terms of the full PRMF objective; total() adds them up.
struct PrmfObjectiveTerms {
  double data = 0.0;        // 1/2 squared error over D
  double regularizer = 0.0; // lambda_u/2 |U|^2 + lambda_v/2 |V|^2
  double trace = 0.0;       // tr(Theta (U U^T + beta Sigma))
  double log_det = 0.0;     // log|Theta + lambda_u/alpha I|
  double l1 = 0.0;          // |Theta|_1
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  int d = 0;

  double total() const {
    return data + regularizer + 0.5 * alpha * (trace - (d + beta) * log_det + gamma * l1);
  }
};

PrmfObjectiveTerms prmf_objective_terms(const SparseRatings& ratings, const FactorMatrix& u, const FactorMatrix& v,
                                        const PrecisionMatrix& theta, const PriorCovariance& sigma,
                                        const HyperParams& params);

// Full objective; requires alpha > 0. Throws NumericError if Theta + (lambda_u/alpha) I is not PD.
double prmf_objective(const SparseRatings& ratings, const FactorMatrix& u, const FactorMatrix& v,
                      const PrecisionMatrix& theta, const PriorCovariance& sigma, const HyperParams& params);

}  // namespace prmf
