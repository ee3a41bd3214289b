#include "prmf/objective.hpp"

#include <cmath>
#include <vector>

namespace prmf {

namespace {

void check_factors(const SparseRatings& ratings, const FactorMatrix& u, const FactorMatrix& v) {
  if (u.rows() != ratings.num_users() || v.rows() != ratings.num_items())
    throw UsageError("factor rows do not match the rating matrix");
  if (u.cols() != v.cols()) throw UsageError("user and item factors differ in dimension");
}

double squared_error(const SparseRatings& ratings, const FactorMatrix& u, const FactorMatrix& v) {
  double s = 0.0;
  for (const auto& r : ratings.triples()) {
    const double residual = r.value - u.row(r.user).dot(v.row(r.item));
    s += residual * residual;
  }
  return s;
}

}  // namespace

double pmf_objective(const SparseRatings& ratings, const FactorMatrix& u, const FactorMatrix& v, double lambda_u,
                     double lambda_v) {
  check_factors(ratings, u, v);
  return 0.5 * squared_error(ratings, u, v) + 0.5 * lambda_u * u.squaredNorm() + 0.5 * lambda_v * v.squaredNorm();
}

double coupling_trace(const PrecisionMatrix& theta, const FactorMatrix& u) {
  if (theta.size() == 0) return 0.0;
  if (theta.size() != u.rows()) throw UsageError("coupling_trace: Theta size does not match U");
  std::vector<double> row(static_cast<std::size_t>(u.cols()));
  double s = 0.0;
  for (int i = 0; i < theta.size(); ++i) {
    theta.row_times(i, u, row.data());
    for (Index c = 0; c < u.cols(); ++c) s += u(i, c) * row[static_cast<std::size_t>(c)];
  }
  return s;
}

double latent_objective(const SparseRatings& ratings, const FactorMatrix& u, const FactorMatrix& v,
                        const PrecisionMatrix& theta, double lambda_u, double lambda_v, double alpha) {
  const double base = pmf_objective(ratings, u, v, lambda_u, lambda_v);
  return alpha == 0.0 ? base : base + 0.5 * alpha * coupling_trace(theta, u);
}

double shifted_log_det(const PrecisionMatrix& theta, double shift) {
  Eigen::MatrixXd a = theta.to_dense();
  a.diagonal().array() += shift;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw NumericError("Theta + (lambda_u/alpha) I is not positive definite");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

PrmfObjectiveTerms prmf_objective_terms(const SparseRatings& ratings, const FactorMatrix& u, const FactorMatrix& v,
                                        const PrecisionMatrix& theta, const PriorCovariance& sigma,
                                        const HyperParams& params) {
  check_factors(ratings, u, v);
  if (!(params.alpha > 0)) throw UsageError("prmf_objective: alpha must be > 0");
  const int m = ratings.num_users();
  if (theta.size() != m) throw UsageError("prmf_objective: Theta must be m x m");
  if (params.beta > 0 && sigma.size() != m) throw UsageError("prmf_objective: Sigma must be m x m when beta > 0");

  PrmfObjectiveTerms t;
  t.alpha = params.alpha;
  t.beta = params.beta;
  t.gamma = params.gamma;
  t.d = int(u.cols());
  t.data = 0.5 * squared_error(ratings, u, v);
  t.regularizer = 0.5 * params.lambda_u * u.squaredNorm() + 0.5 * params.lambda_v * v.squaredNorm();

  double trace = coupling_trace(theta, u);
  if (params.beta > 0) {
    double ts = 0.0;
    for (int i = 0; i < m; ++i)
      for (const auto& e : theta.row(i)) ts += e.value * sigma.coeff(e.col, i);
    trace += params.beta * ts;
  }
  t.trace = trace;
  t.log_det = shifted_log_det(theta, params.lambda_u / params.alpha);
  t.l1 = theta.l1_norm();
  return t;
}

double prmf_objective(const SparseRatings& ratings, const FactorMatrix& u, const FactorMatrix& v,
                      const PrecisionMatrix& theta, const PriorCovariance& sigma, const HyperParams& params) {
  return prmf_objective_terms(ratings, u, v, theta, sigma, params).total();
}

}  // namespace prmf
