#include "prmf/sparse_ratings.hpp"

#include "prmf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace prmf {

void HyperParams::validate() const {
  if (d < 1) throw UsageError("d must be >= 1");
  if (lambda_u < 0 || lambda_v < 0 || alpha < 0 || beta < 0 || gamma < 0)
    throw UsageError("weights lambda_u, lambda_v, alpha, beta, gamma must be >= 0");
  if (!(learning_rate > 0)) throw UsageError("learning rate must be > 0");
  if (!(rho > 0)) throw UsageError("rho must be > 0");
  if (epochs < 1 || admm_iters < 1 || max_iter < 1) throw UsageError("epochs, admm_iters, max_iter must be >= 1");
  if (!(range.min < range.max)) throw UsageError("rating_min must be below rating_max");
  if (!(decay > 0 && decay <= 1)) throw UsageError("decay must lie in (0, 1]");
}

SparseRatings::SparseRatings(int num_users, int num_items, std::vector<Rating> triples)
    : num_users_(num_users), num_items_(num_items), triples_(std::move(triples)) {
  if (num_users < 0 || num_items < 0) throw UsageError("SparseRatings: negative dimension");
  item_counts_.assign(static_cast<std::size_t>(num_items), 0);
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_users), 0);
  for (const auto& r : triples_) {
    if (r.user < 0 || r.user >= num_users || r.item < 0 || r.item >= num_items)
      throw UsageError("SparseRatings: index out of range");
    if (!std::isfinite(r.value)) throw UsageError("SparseRatings: non-finite rating");
    ++counts[static_cast<std::size_t>(r.user)];
    ++item_counts_[static_cast<std::size_t>(r.item)];
  }
  row_offsets_.assign(static_cast<std::size_t>(num_users) + 1, 0);
  std::partial_sum(counts.begin(), counts.end(), row_offsets_.begin() + 1);
  row_entries_.resize(triples_.size());
  std::vector<std::size_t> fill(row_offsets_.begin(), row_offsets_.end() - 1);
  for (const auto& r : triples_) row_entries_[fill[static_cast<std::size_t>(r.user)]++] = {r.item, r.value};
  for (int u = 0; u < num_users; ++u) {
    auto first = row_entries_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[std::size_t(u)]);
    auto last = row_entries_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[std::size_t(u) + 1]);
    std::sort(first, last, [](const ItemRating& a, const ItemRating& b) { return a.item < b.item; });
    if (std::adjacent_find(first, last, [](const ItemRating& a, const ItemRating& b) { return a.item == b.item; }) !=
        last)
      throw UsageError("SparseRatings: duplicate (user, item) pair for user " + std::to_string(u));
  }
}

std::span<const ItemRating> SparseRatings::user_row(int user) const {
  if (user < 0 || user >= num_users_) throw UsageError("user_row: index out of range");
  const auto b = row_offsets_[static_cast<std::size_t>(user)];
  const auto e = row_offsets_[static_cast<std::size_t>(user) + 1];
  return {row_entries_.data() + b, e - b};
}

int SparseRatings::user_count(int user) const { return static_cast<int>(user_row(user).size()); }

double SparseRatings::mean() const {
  if (triples_.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : triples_) s += r.value;
  return s / double(triples_.size());
}

bool SparseRatings::consistent() const {
  if (row_entries_.size() != triples_.size()) return false;
  for (const auto& r : triples_) {
    const auto row = user_row(r.user);
    const auto it = std::lower_bound(row.begin(), row.end(), r.item,
                                     [](const ItemRating& e, int item) { return e.item < item; });
    if (it == row.end() || it->item != r.item || it->value != r.value) return false;
  }
  return true;
}

}  // namespace prmf
