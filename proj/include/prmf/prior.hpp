#pragma once

#include "prmf/ingest.hpp"
#include "prmf/sparse_ratings.hpp"
#include "prmf/symmetric_sparse.hpp"

#include <optional>
#include <span>

namespace prmf {

enum class CovarianceMode { None, ExplicitMasked, ImplicitDense };

struct CovarianceSpec {
  CovarianceMode mode = CovarianceMode::ImplicitDense;
  int floor = 2;  // fewer co-rated items than this -> covariance 0
};

// Population covariance over the items both rows rated, each row centred on
// its own mean over that common subset. Rows must be sorted by item.
double row_covariance(std::span<const ItemRating> row_i, std::span<const ItemRating> row_k, int floor);

// Prior row covariance Sigma. ExplicitMasked keeps only friend pairs (either
// direction) plus the diagonal; ImplicitDense keeps every pair with co-rated
// items. The diagonal is each user's own rating variance.
PriorCovariance build_sigma(const SparseRatings& ratings, const SocialEdges* social, const CovarianceSpec& spec);

// X (m x d) with X X^T the best PSD rank-d approximation of Sigma: top-d
// eigenpairs by eigenvalue, negative eigenvalues clamped to zero, columns in
// descending eigenvalue order, each column's first nonzero entry positive.
FactorMatrix low_rank_factor(const PriorCovariance& sigma, int d);

// Same, for an already-dense symmetric matrix.
FactorMatrix low_rank_factor(const Eigen::MatrixXd& sigma, int d);

}  // namespace prmf
