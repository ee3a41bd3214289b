#include "prmf/ingest.hpp"

#include "prmf/errors.hpp"
#include "prmf/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string_view>

namespace prmf {

namespace {

std::vector<std::string_view> split_fields(std::string_view line, RatingFormat format) {
  std::vector<std::string_view> out;
  const std::string_view sep = format == RatingFormat::Tsv ? "\t" : "::";
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(sep, pos);
    out.push_back(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + sep.size();
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

RatingFormat parse_rating_format(const std::string& name) {
  if (name == "tsv") return RatingFormat::Tsv;
  if (name == "double-colon") return RatingFormat::DoubleColon;
  throw UsageError("unknown dataset format '" + name + "' (expected tsv or double-colon)");
}

std::string to_string(RatingFormat format) { return format == RatingFormat::Tsv ? "tsv" : "double-colon"; }

std::vector<RawRecord> parse_ratings(std::istream& in, RatingFormat format, std::optional<RatingRange> scale,
                                     const std::string& source) {
  std::vector<RawRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto fields = split_fields(text, format);
    if (fields.size() < 3 || fields.size() > 4)
      throw ParseError(source, line_no, "expected 3 or 4 fields, got " + std::to_string(fields.size()));
    RawRecord rec;
    rec.user = std::string(trim(fields[0]));
    rec.item = std::string(trim(fields[1]));
    if (rec.user.empty() || rec.item.empty()) throw ParseError(source, line_no, "empty user or item id");
    if (!parse_number(trim(fields[2]), rec.rating) || !std::isfinite(rec.rating))
      throw ParseError(source, line_no, "rating is not a number");
    if (scale && (rec.rating < scale->min || rec.rating > scale->max))
      throw ParseError(source, line_no, "rating outside the declared scale");
    if (fields.size() == 4) {
      std::int64_t ts = 0;
      if (!parse_number(trim(fields[3]), ts)) throw ParseError(source, line_no, "timestamp is not an integer");
      rec.timestamp = ts;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<RawRecord> filter_min_item_ratings(const std::vector<RawRecord>& records, int min_count) {
  if (min_count < 0) throw UsageError("filter_min_item_ratings: min_count must be >= 0");
  std::unordered_map<std::string, int> counts;
  for (const auto& r : records) ++counts[r.item];
  std::vector<RawRecord> out;
  out.reserve(records.size());
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [&](const RawRecord& r) { return counts[r.item] >= min_count; });
  return out;
}

int IndexMap::insert(const std::string& external) {
  const auto [it, inserted] = lookup_.try_emplace(external, size());
  if (inserted) externals_.push_back(external);
  return it->second;
}

std::optional<int> IndexMap::find(const std::string& external) const {
  const auto it = lookup_.find(external);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

IndexMap IndexMap::from_externals(std::vector<std::string> externals) {
  IndexMap map;
  for (auto& e : externals)
    if (map.insert(e) != map.size() - 1) throw UsageError("IndexMap: duplicate external id '" + e + "'");
  return map;
}

IdMap IdMap::build(const std::vector<RawRecord>& records) {
  IdMap ids;
  for (const auto& r : records) {
    ids.users.insert(r.user);
    ids.items.insert(r.item);
  }
  return ids;
}

SparseRatings to_sparse(const std::vector<RawRecord>& records, const IdMap& ids) {
  std::vector<Rating> triples;
  triples.reserve(records.size());
  for (const auto& r : records) {
    const auto u = ids.users.find(r.user);
    const auto i = ids.items.find(r.item);
    if (!u || !i) throw UsageError("to_sparse: record references an unmapped id");
    triples.push_back({*u, *i, r.rating});
  }
  return SparseRatings(ids.users.size(), ids.items.size(), std::move(triples));
}

SplitSizes split_sizes(std::size_t n, double train_fraction, double validation_fraction_of_train) {
  if (!(train_fraction > 0 && train_fraction < 1)) throw UsageError("train fraction must lie in (0, 1)");
  if (!(validation_fraction_of_train > 0 && validation_fraction_of_train < 1))
    throw UsageError("validation fraction must lie in (0, 1)");
  // The epsilon keeps e.g. (1 - 0.8) * 100 from flooring to 19.
  const auto held = [](double fraction, std::size_t count) {
    return static_cast<std::size_t>(std::floor(fraction * double(count) + 1e-9));
  };
  SplitSizes s;
  s.test = held(1.0 - train_fraction, n);
  const std::size_t pool = n - s.test;
  s.validation = held(validation_fraction_of_train, pool);
  s.train = pool - s.validation;
  return s;
}

RecordSplit split_records(const std::vector<RawRecord>& records, double train_fraction,
                          double validation_fraction_of_train, std::uint64_t seed) {
  if (records.empty()) throw UsageError("split: no records");
  const auto sizes = split_sizes(records.size(), train_fraction, validation_fraction_of_train);

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto rng = make_rng(seed, kSplitStream);
  std::shuffle(order.begin(), order.end(), rng);

  RecordSplit out;
  out.train.reserve(sizes.train);
  out.validation.reserve(sizes.validation);
  out.test.reserve(sizes.test);
  for (std::size_t t = 0; t < order.size(); ++t) {
    const auto& r = records[order[t]];
    if (t < sizes.test)
      out.test.push_back(r);
    else if (t < sizes.test + sizes.validation)
      out.validation.push_back(r);
    else
      out.train.push_back(r);
  }
  return out;
}

DataSplit split(const std::vector<RawRecord>& records, double train_fraction, double validation_fraction_of_train,
                std::uint64_t seed) {
  const auto parts = split_records(records, train_fraction, validation_fraction_of_train, seed);
  DataSplit out;
  out.ids = IdMap::build(records);
  out.train = to_sparse(parts.train, out.ids);
  out.validation = to_sparse(parts.validation, out.ids);
  out.test = to_sparse(parts.test, out.ids);
  return out;
}

SocialEdges parse_social(std::istream& in, const IndexMap& users, const std::string& source) {
  SocialEdges out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::istringstream fields(line);
    std::string a, b;
    if (!(fields >> a >> b)) throw ParseError(source, line_no, "expected two user ids");
    const auto ia = users.find(a);
    const auto ib = users.find(b);
    if (!ia || !ib) {
      ++out.dropped_unknown;
      continue;
    }
    if (*ia == *ib) {
      ++out.dropped_self_loops;
      continue;
    }
    out.edges.emplace_back(*ia, *ib);
  }
  return out;
}

}  // namespace prmf
