#pragma once

#include "prmf/sparse_ratings.hpp"
#include "prmf/symmetric_sparse.hpp"
#include "prmf/types.hpp"

#include <cstdint>
#include <vector>

namespace prmf {

struct EpochSchedule {
  int epochs = 30;
  double learning_rate = 0.01;
  bool shuffle = true;
  double decay = 1.0;  // learning rate of epoch e is learning_rate * decay^e

  static EpochSchedule from(const HyperParams& p) { return {p.epochs, p.learning_rate, p.shuffle, p.decay}; }
  void validate() const;
};

struct StepWeights {
  double lambda_u = 0.0;
  double lambda_v = 0.0;
  double alpha = 0.0;
};

// One update on (i, j, R_ij):
//   U_i <- U_i + lr (delta V_j - lambda_u U_i - alpha Theta_i* U)
//   V_j <- V_j + lr (delta U_i - lambda_v V_j),   delta = R_ij - U_i V_j^T
// Both right-hand sides read the pre-update rows. Theta_i* U walks only the
// nonzeros of row i. Throws DivergenceError (step = -1) on a non-finite row.
void sgd_step(const Rating& r, FactorMatrix& u, FactorMatrix& v, const PrecisionMatrix& theta, const StepWeights& w,
              double learning_rate);

struct LatentPhaseResult {
  std::vector<double> objective_trace;  // latent_objective after each epoch
};

// `epoch_offset` numbers this phase's epochs globally so that each epoch's
// permutation depends only on (seed, global epoch). Theta stays fixed.
LatentPhaseResult run_latent_phase(const SparseRatings& train, FactorMatrix& u, FactorMatrix& v,
                                   const PrecisionMatrix& theta, const StepWeights& w, const EpochSchedule& schedule,
                                   std::uint64_t seed, std::uint64_t epoch_offset = 0, bool record_trace = true);

// Gaussian N(0, 1/d) entries.
FactorMatrix init_factors(int rows, int d, std::uint64_t seed, std::uint64_t stream_index);

struct PmfModel {
  FactorMatrix u;
  FactorMatrix v;
  std::vector<double> objective_trace;
};

// Plain PMF: random init, then the latent phase with the coupling switched off.
PmfModel pmf_train(const SparseRatings& train, const HyperParams& params, const EpochSchedule& schedule);

}  // namespace prmf
