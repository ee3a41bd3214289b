#pragma once

#include "prmf/sparse_ratings.hpp"

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace prmf {

enum class RatingFormat { Tsv, DoubleColon };

RatingFormat parse_rating_format(const std::string& name);  // "tsv" | "double-colon"
std::string to_string(RatingFormat format);

struct RawRecord {
  std::string user;
  std::string item;
  double rating = 0.0;
  std::optional<std::int64_t> timestamp;

  friend bool operator==(const RawRecord&, const RawRecord&) = default;
};

// One record per non-blank line, in file order. A line needs user, item and
// rating; a fourth timestamp field is optional. `scale`, when given, rejects
// ratings outside it. `source` only labels error messages.
std::vector<RawRecord> parse_ratings(std::istream& in, RatingFormat format,
                                     std::optional<RatingRange> scale = std::nullopt,
                                     const std::string& source = "<ratings>");

// Keeps records whose item occurs at least `min_count` times in `records`.
// Single pass: counts are taken once, before anything is removed.
std::vector<RawRecord> filter_min_item_ratings(const std::vector<RawRecord>& records, int min_count);

// External id <-> dense index, indices assigned in order of first appearance.
class IndexMap {
 public:
  int insert(const std::string& external);
  std::optional<int> find(const std::string& external) const;
  const std::string& external(int index) const { return externals_.at(static_cast<std::size_t>(index)); }
  int size() const noexcept { return static_cast<int>(externals_.size()); }
  const std::vector<std::string>& externals() const noexcept { return externals_; }

  static IndexMap from_externals(std::vector<std::string> externals);

  friend bool operator==(const IndexMap& a, const IndexMap& b) { return a.externals_ == b.externals_; }

 private:
  std::vector<std::string> externals_;
  std::unordered_map<std::string, int> lookup_;
};

struct IdMap {
  IndexMap users;
  IndexMap items;

  static IdMap build(const std::vector<RawRecord>& records);

  friend bool operator==(const IdMap&, const IdMap&) = default;
};

// Throws UsageError for ids missing from `ids`.
SparseRatings to_sparse(const std::vector<RawRecord>& records, const IdMap& ids);

struct DataSplit {
  SparseRatings train;
  SparseRatings validation;
  SparseRatings test;
  IdMap ids;
};

struct SplitSizes {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

// Held-out parts get floor(fraction * N); the remainder goes to train.
SplitSizes split_sizes(std::size_t n, double train_fraction, double validation_fraction_of_train);

struct RecordSplit {
  std::vector<RawRecord> train;
  std::vector<RawRecord> validation;
  std::vector<RawRecord> test;
};

// Uniform random disjoint partition of the records, deterministic in `seed`.
RecordSplit split_records(const std::vector<RawRecord>& records, double train_fraction,
                          double validation_fraction_of_train, std::uint64_t seed);

// Uniform random disjoint partition, deterministic in `seed`. The id maps
// cover the full record set so test-only users and items are indexable.
DataSplit split(const std::vector<RawRecord>& records, double train_fraction, double validation_fraction_of_train,
                std::uint64_t seed);

struct SocialEdges {
  std::vector<std::pair<int, int>> edges;  // directed, mapped to user indices
  std::size_t dropped_unknown = 0;
  std::size_t dropped_self_loops = 0;
};

// Whitespace-separated "user user" per line. Extra columns (e.g. a trust
// weight) are ignored.
SocialEdges parse_social(std::istream& in, const IndexMap& users, const std::string& source = "<social>");

}  // namespace prmf
