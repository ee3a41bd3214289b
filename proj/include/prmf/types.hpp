#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace prmf {

using Index = Eigen::Index;

// Latent factors: one row per user (or item). Row-major so that U.row(i) is contiguous.
template <typename Scalar>
using FactorMatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using FactorMatrix = FactorMatrixT<double>;

template <typename Scalar>
using RowVectorT = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
using RowVector = RowVectorT<double>;

struct RatingRange {
  double min = 1.0;
  double max = 5.0;

  double clamp(double x) const noexcept { return x < min ? min : (x > max ? max : x); }
};

// Every scalar knob of the model and of the alternating training loop.
// lambda_u/lambda_v/alpha are the reparameterized noise ratios; the raw
// variances are never represented.
struct HyperParams {
  int d = 10;
  double lambda_u = 0.01;
  double lambda_v = 0.01;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 1e-4;
  double learning_rate = 0.01;
  double rho = 100.0;
  int epochs = 30;       // SGD epochs per outer iteration
  int admm_iters = 30;   // ADMM iterations per outer iteration
  int max_iter = 10;     // outer iterations
  std::uint64_t seed = 1;
  RatingRange range{};
  double decay = 1.0;    // per-epoch geometric learning-rate decay
  bool shuffle = true;

  // Throws UsageError when a field is out of its domain.
  void validate() const;
};

}  // namespace prmf
