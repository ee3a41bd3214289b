#include "prmf/precision.hpp"

#include <cstdio>

namespace prmf {

std::string format_log_line(const AdmmIterationLog& rec) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "admm iter=%d primal_residual=%.9g l1=%.9g nnz=%zu", rec.iteration,
                rec.primal_residual, rec.l1, rec.nonzeros);
  return buf;
}

AdmmResult admm_solve(const FactorMatrix& w, const AdmmSettings& settings, const Eigen::MatrixXd& theta_init) {
  const Index m = w.rows();
  if (theta_init.rows() != m || theta_init.cols() != m) throw UsageError("admm_solve: Theta_init must be m x m");
  if (settings.iterations < 1) throw UsageError("admm_solve: need at least one iteration");
  if (!(settings.alpha > 0)) throw UsageError("admm_solve: alpha must be > 0");
  if (settings.tau < 0) throw UsageError("admm_solve: tau must be >= 0");

  const WoodburyApplicator<double> p(w, settings.rho);
  // E / rho, with E = I - (lambda_u / alpha) W W^T.
  Eigen::MatrixXd e_scaled = Eigen::MatrixXd::Identity(m, m) / settings.rho;
  e_scaled.noalias() -= (settings.lambda_u / settings.alpha / settings.rho) * (w * w.transpose());
  const double threshold = settings.tau / settings.rho;

  AdmmResult r;
  r.z = theta_init;
  r.y = Eigen::MatrixXd::Zero(m, m);
  r.log.reserve(static_cast<std::size_t>(settings.iterations));
  for (int t = 1; t <= settings.iterations; ++t) {
    r.theta = soft_threshold(r.z - r.y, threshold);
    r.z = p.apply(e_scaled + r.theta + r.y);
    r.y += r.theta - r.z;
    if (!r.z.allFinite() || !r.y.allFinite() || !r.theta.allFinite())
      throw DivergenceError("admm", t, "non-finite iterate");
    AdmmIterationLog rec;
    rec.iteration = t;
    rec.primal_residual = (r.theta - r.z).norm();
    rec.l1 = r.theta.cwiseAbs().sum();
    rec.nonzeros = static_cast<std::size_t>((r.theta.array() != 0.0).count());
    r.log.push_back(rec);
  }
  r.primal_residual = r.log.back().primal_residual;
  return r;
}

double clime_objective(const FactorMatrix& w, double lambda_u_over_alpha, double tau, const Eigen::MatrixXd& theta) {
  if (theta.rows() != w.rows() || theta.cols() != w.rows()) throw UsageError("clime_objective: shape mismatch");
  const Eigen::MatrixXd wt_theta = w.transpose() * theta;  // r x m
  const double quad = wt_theta.squaredNorm();
  const double tr_c_theta = (wt_theta.array() * w.transpose().array()).sum();
  const double tr_e_theta = theta.trace() - lambda_u_over_alpha * tr_c_theta;
  return 0.5 * quad - tr_e_theta + tau * theta.cwiseAbs().sum();
}

AugmentedFactors augment_factors(const FactorMatrix& u, const FactorMatrix* x, double beta, double gamma) {
  const double d = double(u.cols());
  AugmentedFactors a;
  if (beta == 0.0) {
    a.w = u / std::sqrt(d);
    a.tau = gamma / d;
    return a;
  }
  if (!x) throw UsageError("augment_factors: beta > 0 needs the prior factor X");
  if (x->rows() != u.rows()) throw UsageError("augment_factors: X must have one row per user");
  const double scale = 1.0 / std::sqrt(d + beta);
  a.w.resize(u.rows(), u.cols() + x->cols());
  a.w.leftCols(u.cols()) = scale * u;
  a.w.rightCols(x->cols()) = (std::sqrt(beta) * scale) * *x;
  a.tau = gamma / (d + beta);
  return a;
}

ThetaPhaseResult theta_phase(const FactorMatrix& u, const FactorMatrix* x, const HyperParams& params,
                             const PrecisionMatrix& current) {
  const Index m = u.rows();
  if (current.size() != m) throw UsageError("theta_phase: current Theta must be m x m");
  const auto aug = augment_factors(u, x, params.beta, params.gamma);
  const AdmmSettings settings{params.lambda_u, params.alpha, aug.tau, params.rho, params.admm_iters};
  auto admm = admm_solve(aug.w, settings, current.to_dense());

  ThetaPhaseResult out;
  out.theta = symmetrize(admm.theta);
  out.sparsity = out.theta.sparsity();
  out.primal_residual = admm.primal_residual;
  out.log = std::move(admm.log);
  // Extremes over all m^2 positions, implicit zeros included.
  const auto entries = out.theta.entries();
  if (!entries.empty()) {
    const bool has_zero = out.theta.nonzeros() < std::size_t(m) * std::size_t(m);
    out.min_entry = has_zero ? 0.0 : entries.front().value;
    out.max_entry = out.min_entry;
    for (const auto& e : entries) {
      out.min_entry = std::min(out.min_entry, e.value);
      out.max_entry = std::max(out.max_entry, e.value);
    }
  }
  return out;
}

}  // namespace prmf
