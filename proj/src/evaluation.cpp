#include "prmf/evaluation.hpp"

#include "prmf/errors.hpp"
#include "prmf/objective.hpp"
#include "prmf/precision.hpp"
#include "prmf/sgd.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace prmf {

double rmse(std::span<const PredictionPair> pairs) {
  if (pairs.empty()) throw UsageError("rmse: empty prediction list");
  double s = 0.0;
  for (const auto& p : pairs) s += (p.actual - p.predicted) * (p.actual - p.predicted);
  return std::sqrt(s / double(pairs.size()));
}

double mae(std::span<const PredictionPair> pairs) {
  if (pairs.empty()) throw UsageError("mae: empty prediction list");
  double s = 0.0;
  for (const auto& p : pairs) s += std::abs(p.actual - p.predicted);
  return s / double(pairs.size());
}

double Model::predict(int user, int item, const RatingRange& range, bool* fallback) const {
  const bool known = user >= 0 && item >= 0 && std::size_t(user) < user_known.size() &&
                     std::size_t(item) < item_known.size() && user_known[std::size_t(user)] &&
                     item_known[std::size_t(item)];
  if (fallback) *fallback = !known;
  if (!known) return range.clamp(global_mean);
  return range.clamp(u.row(user).dot(v.row(item)));
}

void mark_known(Model& model, const SparseRatings& train) {
  model.global_mean = train.mean();
  model.user_known.assign(std::size_t(train.num_users()), 0);
  model.item_known.assign(std::size_t(train.num_items()), 0);
  for (const auto& r : train.triples()) {
    model.user_known[std::size_t(r.user)] = 1;
    model.item_known[std::size_t(r.item)] = 1;
  }
}

MetricReport evaluate(const Model& model, const SparseRatings& test, const RatingRange& range,
                      std::uint64_t fingerprint) {
  std::vector<PredictionPair> pairs;
  pairs.reserve(test.size());
  MetricReport rep;
  for (const auto& r : test.triples()) {
    bool fallback = false;
    pairs.push_back({model.predict(r.user, r.item, range, &fallback), r.value});
    rep.cold_start_fallbacks += fallback ? 1 : 0;
  }
  rep.rmse = rmse(pairs);
  rep.mae = mae(pairs);
  rep.num_test_ratings = pairs.size();
  rep.fingerprint = fingerprint;
  return rep;
}

std::uint64_t config_fingerprint(const HyperParams& p, const std::string& dataset_tag) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "d=%d;lu=%.17g;lv=%.17g;a=%.17g;b=%.17g;g=%.17g;lr=%.17g;rho=%.17g;T=%d;K=%d;it=%d;seed=%llu;"
                "rmin=%.17g;rmax=%.17g;decay=%.17g;shuffle=%d;",
                p.d, p.lambda_u, p.lambda_v, p.alpha, p.beta, p.gamma, p.learning_rate, p.rho, p.epochs,
                p.admm_iters, p.max_iter, static_cast<unsigned long long>(p.seed), p.range.min, p.range.max, p.decay,
                int(p.shuffle));
  std::uint64_t h = 1469598103934665603ull;
  const auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  mix(buf);
  mix(dataset_tag);
  return h;
}

namespace {

std::optional<MetricReport> score(const Model& model, const SparseRatings& ratings, const RatingRange& range) {
  if (ratings.empty()) return std::nullopt;
  return evaluate(model, ratings, range);
}

}  // namespace

TrainResult train_prmf(const SparseRatings& train, const SparseRatings& validation, const PriorModel* prior,
                       const HyperParams& params, const TrainOptions& options) {
  params.validate();
  const int m = train.num_users();
  const bool coupled = params.alpha > 0;
  if (params.beta > 0 && coupled) {
    if (!prior) throw UsageError("train_prmf: beta > 0 needs a prior covariance");
    if (prior->x.rows() != m) throw UsageError("train_prmf: prior factor has the wrong number of rows");
  }
  const auto emit = [&](const std::string& line) {
    if (options.log) options.log(line);
  };

  Model current;
  current.u = init_factors(m, params.d, params.seed, 0);
  current.v = init_factors(train.num_items(), params.d, params.seed, 1);
  current.theta = coupled ? PrecisionMatrix::identity(m) : PrecisionMatrix(m);
  mark_known(current, train);

  const StepWeights weights{params.lambda_u, params.lambda_v, params.alpha};
  const EpochSchedule schedule = EpochSchedule::from(params);
  const FactorMatrix* x = (params.beta > 0 && prior) ? &prior->x : nullptr;
  const PriorCovariance empty_sigma(m);

  TrainResult result;
  double best_rmse = std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= params.max_iter; ++iter) {
    OuterIteration rec;
    rec.iteration = iter;
    rec.objective_before_sgd =
        latent_objective(train, current.u, current.v, current.theta, params.lambda_u, params.lambda_v, params.alpha);
    run_latent_phase(train, current.u, current.v, current.theta, weights, schedule, params.seed,
                     std::uint64_t(iter - 1) * std::uint64_t(params.epochs), false);
    rec.objective_after_sgd =
        latent_objective(train, current.u, current.v, current.theta, params.lambda_u, params.lambda_v, params.alpha);

    if (coupled) {
      auto phase = theta_phase(current.u, x, params, current.theta);
      for (const auto& l : phase.log) emit("iter=" + std::to_string(iter) + " " + format_log_line(l));
      current.theta = std::move(phase.theta);
      rec.primal_residual = phase.primal_residual;
    }
    rec.sparsity = current.theta.sparsity();
    rec.nonzeros = current.theta.nonzeros();

    if (coupled && options.track_objective) {
      try {
        rec.full_objective = prmf_objective(train, current.u, current.v, current.theta,
                                            prior ? prior->sigma : empty_sigma, params);
      } catch (const NumericError& err) {
        emit("iter=" + std::to_string(iter) + " objective unavailable: " + err.what());
      }
    }

    if (const auto val = score(current, validation, params.range)) {
      rec.validation_rmse = val->rmse;
      rec.validation_mae = val->mae;
      if (val->rmse < best_rmse) {
        best_rmse = val->rmse;
        result.best_iteration = iter;
        result.model = current;
      }
    }
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "outer iter=%d objective_before=%.9g objective_after=%.9g val_rmse=%.6f sparsity=%.6f nnz=%zu "
                  "primal_residual=%.6g",
                  iter, rec.objective_before_sgd, rec.objective_after_sgd, rec.validation_rmse.value_or(NAN),
                  rec.sparsity, rec.nonzeros, rec.primal_residual);
    emit(buf);
    result.trace.push_back(rec);
  }
  if (result.best_iteration == 0) {
    result.best_iteration = params.max_iter;
    result.model = current;
  }
  result.final_model = std::move(current);
  return result;
}

std::vector<SweepPoint> gamma_sweep(const SparseRatings& train, const SparseRatings& validation,
                                    const SparseRatings& test, const PriorModel* prior, const HyperParams& params,
                                    std::span<const double> grid, const TrainOptions& options) {
  if (grid.empty()) throw UsageError("gamma_sweep: empty grid");
  std::vector<SweepPoint> out;
  for (double gamma : grid) {
    SweepPoint pt;
    pt.gamma = gamma;
    try {
      HyperParams p = params;
      p.gamma = gamma;
      const auto trained = train_prmf(train, validation, prior, p, options);
      const auto rep = evaluate(trained.model, test, p.range);
      pt.sparsity = trained.model.theta.sparsity();
      pt.rmse = rep.rmse;
      pt.mae = rep.mae;
      pt.best_iteration = trained.best_iteration;
    } catch (const std::exception& err) {
      pt.error = err.what();
    }
    out.push_back(pt);
  }
  return out;
}

}  // namespace prmf
