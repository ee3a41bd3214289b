#pragma once

#include "prmf/errors.hpp"
#include "prmf/types.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace prmf {

template <typename Scalar>
struct SymmetricEntry {
  int row = 0;
  int col = 0;  // row <= col
  Scalar value{};

  friend bool operator==(const SymmetricEntry&, const SymmetricEntry&) = default;
};

template <typename Scalar>
struct RowEntry {
  int col = 0;
  Scalar value{};
};

// Symmetric m x m matrix stored once per unordered pair (row <= col), with a
// full CSR adjacency (both triangles) derived from it for row products.
// Symmetry is structural: coeff(i, k) and coeff(k, i) read the same entry.
template <typename Scalar>
class SymmetricSparse {
 public:
  using Entry = SymmetricEntry<Scalar>;
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  SymmetricSparse() = default;
  explicit SymmetricSparse(int size) : size_(size), offsets_(static_cast<std::size_t>(size) + 1, 0) {
    if (size < 0) throw UsageError("SymmetricSparse: negative size");
  }

  // Entries may be given in either triangle; duplicates of one pair are an error.
  // Exact zeros are dropped.
  SymmetricSparse(int size, std::vector<Entry> entries) : size_(size) {
    if (size < 0) throw UsageError("SymmetricSparse: negative size");
    for (auto& e : entries) {
      if (e.row < 0 || e.col < 0 || e.row >= size || e.col >= size)
        throw UsageError("SymmetricSparse: entry index out of range");
      if (e.row > e.col) std::swap(e.row, e.col);
    }
    std::erase_if(entries, [](const Entry& e) { return e.value == Scalar(0); });
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    for (std::size_t t = 1; t < entries.size(); ++t)
      if (entries[t].row == entries[t - 1].row && entries[t].col == entries[t - 1].col)
        throw UsageError("SymmetricSparse: duplicate entry");
    entries_ = std::move(entries);
    build_rows();
  }

  static SymmetricSparse identity(int size) {
    std::vector<Entry> e;
    e.reserve(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) e.push_back({i, i, Scalar(1)});
    return SymmetricSparse(size, std::move(e));
  }

  // Reads the upper triangle of a matrix that is already symmetric.
  template <typename Derived>
  static SymmetricSparse from_dense_upper(const Eigen::MatrixBase<Derived>& a) {
    if (a.rows() != a.cols()) throw UsageError("from_dense_upper: matrix not square");
    std::vector<Entry> e;
    for (Index i = 0; i < a.rows(); ++i)
      for (Index k = i; k < a.cols(); ++k)
        if (a(i, k) != Scalar(0)) e.push_back({int(i), int(k), a(i, k)});
    return SymmetricSparse(int(a.rows()), std::move(e));
  }

  int size() const noexcept { return size_; }
  std::span<const Entry> entries() const noexcept { return entries_; }

  std::span<const RowEntry<Scalar>> row(int i) const {
    const auto begin = offsets_.at(static_cast<std::size_t>(i));
    const auto end = offsets_.at(static_cast<std::size_t>(i) + 1);
    return {adjacency_.data() + begin, end - begin};
  }

  Scalar coeff(int i, int k) const {
    const auto r = row(i);
    const auto it = std::lower_bound(r.begin(), r.end(), k,
                                     [](const RowEntry<Scalar>& e, int c) { return e.col < c; });
    return (it != r.end() && it->col == k) ? it->value : Scalar(0);
  }

  // Nonzeros counted over all m^2 positions.
  std::size_t nonzeros() const noexcept { return adjacency_.size(); }

  // Fraction of the m^2 positions (diagonal included) that are zero.
  double sparsity() const noexcept {
    if (size_ == 0) return 1.0;
    const double total = double(size_) * double(size_);
    return 1.0 - double(nonzeros()) / total;
  }

  // Entrywise l1 norm over all m^2 positions.
  Scalar l1_norm() const {
    Scalar s(0);
    for (const auto& e : entries_) s += (e.row == e.col ? Scalar(1) : Scalar(2)) * std::abs(e.value);
    return s;
  }

  bool all_finite() const {
    return std::all_of(entries_.begin(), entries_.end(),
                       [](const Entry& e) { return std::isfinite(double(e.value)); });
  }

  Dense to_dense() const {
    Dense a = Dense::Zero(size_, size_);
    for (const auto& e : entries_) {
      a(e.row, e.col) = e.value;
      a(e.col, e.row) = e.value;
    }
    return a;
  }

  SymmetricSparse scaled(Scalar s) const {
    auto e = entries_;
    for (auto& x : e) x.value *= s;
    return SymmetricSparse(size_, std::move(e));
  }

  // Row i of (this * F) for a row-major dense F with contiguous rows.
  template <typename Derived>
  void row_times(int i, const Eigen::MatrixBase<Derived>& f, Scalar* out) const {
    static_assert(Derived::IsRowMajor, "row_times needs contiguous rows");
    const Scalar* base = &f.derived().coeffRef(0, 0);
    switch (f.cols()) {
      case 5: return row_times_fixed<5>(i, base, out);
      case 10: return row_times_fixed<10>(i, base, out);
      case 20: return row_times_fixed<20>(i, base, out);
      default: break;
    }
    const Index d = f.cols();
    std::fill(out, out + d, Scalar(0));
    for (const auto& e : row(i)) {
      const Scalar* src = base + Index(e.col) * d;
      for (Index c = 0; c < d; ++c) out[c] += e.value * src[c];
    }
  }

  friend bool operator==(const SymmetricSparse& a, const SymmetricSparse& b) {
    return a.size_ == b.size_ && a.entries_ == b.entries_;
  }

 private:
  template <int D>
  void row_times_fixed(int i, const Scalar* base, Scalar* out) const {
    Scalar acc[D] = {};
    for (const auto& e : row(i)) {
      const Scalar* src = base + std::size_t(e.col) * D;
      for (int c = 0; c < D; ++c) acc[c] += e.value * src[c];
    }
    std::copy(acc, acc + D, out);
  }

  void build_rows() {
    offsets_.assign(static_cast<std::size_t>(size_) + 1, 0);
    for (const auto& e : entries_) {
      ++offsets_[static_cast<std::size_t>(e.row) + 1];
      if (e.row != e.col) ++offsets_[static_cast<std::size_t>(e.col) + 1];
    }
    for (std::size_t i = 1; i < offsets_.size(); ++i) offsets_[i] += offsets_[i - 1];
    adjacency_.resize(offsets_.back());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    // entries_ is sorted by (row, col); pushing both directions in this order
    // leaves every adjacency row sorted by column.
    for (const auto& e : entries_) {
      if (e.row != e.col) adjacency_[fill[std::size_t(e.col)]++] = {e.row, e.value};
    }
    for (const auto& e : entries_) adjacency_[fill[std::size_t(e.row)]++] = {e.col, e.value};
  }

  int size_ = 0;
  std::vector<Entry> entries_;
  std::vector<std::size_t> offsets_{0};
  std::vector<RowEntry<Scalar>> adjacency_;
};

// Learned user dependency Theta.
using PrecisionMatrix = SymmetricSparse<double>;
// Prior user covariance Sigma.
using PriorCovariance = SymmetricSparse<double>;

}  // namespace prmf
