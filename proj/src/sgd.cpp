#include "prmf/sgd.hpp"

#include "prmf/errors.hpp"
#include "prmf/objective.hpp"
#include "prmf/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace prmf {

void EpochSchedule::validate() const {
  if (epochs < 0) throw UsageError("epochs must be >= 0");
  if (!(learning_rate > 0)) throw UsageError("learning rate must be > 0");
  if (!(decay > 0 && decay <= 1)) throw UsageError("decay must lie in (0, 1]");
}

namespace {

// Update core on raw rows; `coupling` holds Theta_i* U (or nullptr when alpha == 0).
inline bool apply_step(double rating, double* ui, double* vj, const double* coupling, Index d, const StepWeights& w,
                       double lr) {
  double pred = 0.0;
  for (Index c = 0; c < d; ++c) pred += ui[c] * vj[c];
  const double delta = rating - pred;
  bool finite = true;
  for (Index c = 0; c < d; ++c) {
    const double uc = ui[c];
    const double vc = vj[c];
    double gu = delta * vc - w.lambda_u * uc;
    if (coupling) gu -= w.alpha * coupling[c];
    ui[c] = uc + lr * gu;
    vj[c] = vc + lr * (delta * uc - w.lambda_v * vc);
    finite = finite && std::isfinite(ui[c]) && std::isfinite(vj[c]);
  }
  return finite;
}

}  // namespace

void sgd_step(const Rating& r, FactorMatrix& u, FactorMatrix& v, const PrecisionMatrix& theta, const StepWeights& w,
              double learning_rate) {
  const Index d = u.cols();
  if (v.cols() != d) throw UsageError("sgd_step: factor dimensions differ");
  if (r.user < 0 || r.user >= u.rows() || r.item < 0 || r.item >= v.rows())
    throw UsageError("sgd_step: index out of range");
  const bool coupled = w.alpha != 0.0 && theta.size() > 0;
  if (coupled && theta.size() != u.rows()) throw UsageError("sgd_step: Theta size does not match U");
  RowVector coupling;
  if (coupled) {
    coupling.resize(d);
    theta.row_times(r.user, u, coupling.data());
  }
  if (!apply_step(r.value, &u(r.user, 0), &v(r.item, 0), coupled ? coupling.data() : nullptr, d, w, learning_rate))
    throw DivergenceError("sgd", -1,
                          "non-finite factor at (user " + std::to_string(r.user) + ", item " +
                              std::to_string(r.item) + ", rating " + std::to_string(r.value) + ")");
}

LatentPhaseResult run_latent_phase(const SparseRatings& train, FactorMatrix& u, FactorMatrix& v,
                                   const PrecisionMatrix& theta, const StepWeights& w, const EpochSchedule& schedule,
                                   std::uint64_t seed, std::uint64_t epoch_offset, bool record_trace) {
  schedule.validate();
  if (u.rows() != train.num_users() || v.rows() != train.num_items() || u.cols() != v.cols())
    throw UsageError("run_latent_phase: factor shapes do not match the ratings");
  const bool coupled = w.alpha != 0.0 && theta.size() > 0;
  if (coupled && theta.size() != u.rows()) throw UsageError("run_latent_phase: Theta size does not match U");

  const auto triples = train.triples();
  const Index d = u.cols();
  std::vector<std::size_t> order(triples.size());
  RowVector coupling(d);
  LatentPhaseResult result;
  double lr = schedule.learning_rate;
  for (int e = 0; e < schedule.epochs; ++e) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (schedule.shuffle) {
      auto rng = make_rng(seed, kEpochStream, epoch_offset + std::uint64_t(e));
      std::shuffle(order.begin(), order.end(), rng);
    }
    for (std::size_t t = 0; t < order.size(); ++t) {
      const Rating& r = triples[order[t]];
      if (coupled) theta.row_times(r.user, u, coupling.data());
      if (!apply_step(r.value, &u(r.user, 0), &v(r.item, 0), coupled ? coupling.data() : nullptr, d, w, lr))
        throw DivergenceError("sgd", long(t),
                              "epoch " + std::to_string(epoch_offset + std::uint64_t(e)) + ", (user " +
                                  std::to_string(r.user) + ", item " + std::to_string(r.item) + ", rating " +
                                  std::to_string(r.value) + ")");
    }
    lr *= schedule.decay;
    if (record_trace)
      result.objective_trace.push_back(latent_objective(train, u, v, theta, w.lambda_u, w.lambda_v, w.alpha));
  }
  return result;
}

FactorMatrix init_factors(int rows, int d, std::uint64_t seed, std::uint64_t stream_index) {
  auto rng = make_rng(seed, kInitStream, stream_index);
  std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(double(d)));
  FactorMatrix f(rows, d);
  for (Index r = 0; r < f.rows(); ++r)
    for (Index c = 0; c < f.cols(); ++c) f(r, c) = gauss(rng);
  return f;
}

PmfModel pmf_train(const SparseRatings& train, const HyperParams& params, const EpochSchedule& schedule) {
  PmfModel model;
  model.u = init_factors(train.num_users(), params.d, params.seed, 0);
  model.v = init_factors(train.num_items(), params.d, params.seed, 1);
  const StepWeights w{params.lambda_u, params.lambda_v, 0.0};
  model.objective_trace =
      run_latent_phase(train, model.u, model.v, PrecisionMatrix(), w, schedule, params.seed).objective_trace;
  return model;
}

}  // namespace prmf
