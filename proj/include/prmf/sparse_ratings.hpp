#pragma once

#include "prmf/types.hpp"

#include <span>
#include <vector>

namespace prmf {

struct Rating {
  int user = 0;
  int item = 0;
  double value = 0.0;

  friend bool operator==(const Rating&, const Rating&) = default;
};

struct ItemRating {
  int item = 0;
  double value = 0.0;
};

// Observed entries D of an m x n rating matrix. The triple list keeps the
// order it was built with; the per-user view is sorted by item.
class SparseRatings {
 public:
  SparseRatings() = default;
  // Throws UsageError on out-of-range indices or a repeated (user, item) pair.
  SparseRatings(int num_users, int num_items, std::vector<Rating> triples);

  int num_users() const noexcept { return num_users_; }
  int num_items() const noexcept { return num_items_; }
  std::size_t size() const noexcept { return triples_.size(); }
  bool empty() const noexcept { return triples_.empty(); }

  std::span<const Rating> triples() const noexcept { return triples_; }
  std::span<const ItemRating> user_row(int user) const;

  int user_count(int user) const;
  int item_count(int item) const { return item_counts_.at(static_cast<std::size_t>(item)); }

  double mean() const;

  // Row view and triple list describe the same set.
  bool consistent() const;

 private:
  int num_users_ = 0;
  int num_items_ = 0;
  std::vector<Rating> triples_;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<ItemRating> row_entries_;
  std::vector<int> item_counts_;
};

}  // namespace prmf
