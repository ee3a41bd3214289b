#pragma once

#include "prmf/sparse_ratings.hpp"
#include "prmf/symmetric_sparse.hpp"
#include "prmf/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace prmf {

struct PredictionPair {
  double predicted = 0.0;
  double actual = 0.0;
};

// Both throw UsageError on an empty list.
double rmse(std::span<const PredictionPair> pairs);
double mae(std::span<const PredictionPair> pairs);

// Everything needed to score held-out ratings.
struct Model {
  FactorMatrix u;
  FactorMatrix v;
  PrecisionMatrix theta;
  double global_mean = 0.0;          // training mean, the cold-start fallback
  std::vector<std::uint8_t> user_known;  // 1 if the user has training ratings
  std::vector<std::uint8_t> item_known;

  // Clamped prediction; falls back to the global mean for unseen users/items.
  double predict(int user, int item, const RatingRange& range, bool* fallback = nullptr) const;
};

void mark_known(Model& model, const SparseRatings& train);

struct MetricReport {
  double rmse = 0.0;
  double mae = 0.0;
  std::size_t num_test_ratings = 0;
  std::size_t cold_start_fallbacks = 0;
  std::uint64_t fingerprint = 0;
};

MetricReport evaluate(const Model& model, const SparseRatings& test, const RatingRange& range,
                      std::uint64_t fingerprint = 0);

// FNV-1a over a canonical text form of the parameters and the dataset tag.
std::uint64_t config_fingerprint(const HyperParams& params, const std::string& dataset_tag);

// Prior information for beta > 0: Sigma and its rank-d factor X.
struct PriorModel {
  PriorCovariance sigma;
  FactorMatrix x;
};

struct OuterIteration {
  int iteration = 0;  // 1-based
  double objective_before_sgd = 0.0;  // latent objective with the Theta the SGD phase used
  double objective_after_sgd = 0.0;
  std::optional<double> validation_rmse;
  std::optional<double> validation_mae;
  double sparsity = 0.0;
  std::size_t nonzeros = 0;
  double primal_residual = 0.0;
  std::optional<double> full_objective;  // empty when Theta + (lambda_u/alpha) I is not PD
};

struct TrainOptions {
  bool track_objective = true;  // evaluate the log-determinant objective every outer iteration
  std::function<void(const std::string&)> log;  // structured log lines; may be empty
};

struct TrainResult {
  Model model;  // parameters of the best validation iteration
  Model final_model;
  int best_iteration = 0;
  std::vector<OuterIteration> trace;
};

// Alternates T SGD epochs and a Theta phase for max_iter outer iterations,
// starting from Theta = I. alpha == 0 switches the coupling off and skips the
// Theta phase (plain PMF, Theta stays zero). beta > 0 requires `prior`.
// The returned model is the iterate with the lowest validation RMSE (the last
// one when validation is empty).
TrainResult train_prmf(const SparseRatings& train, const SparseRatings& validation, const PriorModel* prior,
                       const HyperParams& params, const TrainOptions& options = {});

struct SweepPoint {
  double gamma = 0.0;
  double sparsity = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
  int best_iteration = 0;
  std::optional<std::string> error;
};

// One train_prmf per gamma with everything else shared; a failing grid point
// is recorded and the sweep moves on.
std::vector<SweepPoint> gamma_sweep(const SparseRatings& train, const SparseRatings& validation,
                                    const SparseRatings& test, const PriorModel* prior, const HyperParams& params,
                                    std::span<const double> grid, const TrainOptions& options = {});

}  // namespace prmf
