#include "prmf/prior.hpp"

#include "prmf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace prmf {

double row_covariance(std::span<const ItemRating> row_i, std::span<const ItemRating> row_k, int floor) {
  std::vector<std::pair<double, double>> common;
  auto a = row_i.begin();
  auto b = row_k.begin();
  while (a != row_i.end() && b != row_k.end()) {
    if (a->item < b->item) {
      ++a;
    } else if (b->item < a->item) {
      ++b;
    } else {
      common.emplace_back(a->value, b->value);
      ++a;
      ++b;
    }
  }
  if (common.empty() || common.size() < static_cast<std::size_t>(std::max(floor, 1))) return 0.0;
  const double n = double(common.size());
  double mi = 0.0, mk = 0.0;
  for (const auto& [x, y] : common) {
    mi += x;
    mk += y;
  }
  mi /= n;
  mk /= n;
  double s = 0.0;
  for (const auto& [x, y] : common) s += (x - mi) * (y - mk);
  return s / n;
}

PriorCovariance build_sigma(const SparseRatings& ratings, const SocialEdges* social, const CovarianceSpec& spec) {
  if (ratings.empty()) throw UsageError("build_sigma: no ratings");
  const int m = ratings.num_users();
  if (spec.mode == CovarianceMode::None) return PriorCovariance(m);
  if (spec.floor < 2) throw UsageError("build_sigma: covariance floor must be >= 2");

  std::vector<SymmetricEntry<double>> entries;
  for (int i = 0; i < m; ++i) {
    const double v = row_covariance(ratings.user_row(i), ratings.user_row(i), spec.floor);
    if (v != 0.0) entries.push_back({i, i, v});
  }

  if (spec.mode == CovarianceMode::ExplicitMasked) {
    if (!social) throw UsageError("build_sigma: explicit mode needs social edges");
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(social->edges.size());
    for (auto [a, b] : social->edges) {
      if (a < 0 || b < 0 || a >= m || b >= m) throw UsageError("build_sigma: social edge out of range");
      if (a == b) continue;
      pairs.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    for (auto [a, b] : pairs) {
      const double v = row_covariance(ratings.user_row(a), ratings.user_row(b), spec.floor);
      if (v != 0.0) entries.push_back({a, b, v});
    }
    return PriorCovariance(m, std::move(entries));
  }

  // Implicit: candidate partners of i are users k > i sharing at least one item.
  std::vector<std::vector<int>> raters(static_cast<std::size_t>(ratings.num_items()));
  for (int u = 0; u < m; ++u)
    for (const auto& e : ratings.user_row(u)) raters[static_cast<std::size_t>(e.item)].push_back(u);
  std::vector<int> stamp(static_cast<std::size_t>(m), -1);
  std::vector<int> partners;
  for (int i = 0; i < m; ++i) {
    partners.clear();
    for (const auto& e : ratings.user_row(i))
      for (int k : raters[static_cast<std::size_t>(e.item)])
        if (k > i && stamp[static_cast<std::size_t>(k)] != i) {
          stamp[static_cast<std::size_t>(k)] = i;
          partners.push_back(k);
        }
    std::sort(partners.begin(), partners.end());
    for (int k : partners) {
      const double v = row_covariance(ratings.user_row(i), ratings.user_row(k), spec.floor);
      if (v != 0.0) entries.push_back({i, k, v});
    }
  }
  return PriorCovariance(m, std::move(entries));
}

FactorMatrix low_rank_factor(const Eigen::MatrixXd& sigma, int d) {
  const Index m = sigma.rows();
  if (sigma.cols() != m) throw UsageError("low_rank_factor: matrix not square");
  if (d < 1 || d > m) throw UsageError("low_rank_factor: need 1 <= d <= m");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  if (eig.info() != Eigen::Success) throw NumericError("low_rank_factor: eigendecomposition failed");

  // Eigen returns eigenvalues in increasing order.
  FactorMatrix x(m, d);
  for (int c = 0; c < d; ++c) {
    const Index src = m - 1 - c;
    const double lambda = std::max(eig.eigenvalues()(src), 0.0);
    Eigen::VectorXd vec = eig.eigenvectors().col(src);
    const double tiny = 1e-12 * vec.cwiseAbs().maxCoeff();
    for (Index r = 0; r < m; ++r)
      if (std::abs(vec(r)) > tiny) {
        if (vec(r) < 0) vec = -vec;
        break;
      }
    x.col(c) = std::sqrt(lambda) * vec;
  }
  return x;
}

FactorMatrix low_rank_factor(const PriorCovariance& sigma, int d) { return low_rank_factor(sigma.to_dense(), d); }

}  // namespace prmf
