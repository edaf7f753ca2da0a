#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "critset/errors.hpp"

namespace critset {

using Index = std::int32_t;

/// Sparse matrix over GF(2), stored by columns. Each column is the sorted
/// list of rows holding a one; the lowest one of a column is its last entry.
class SparseBinaryMatrix {
 public:
  SparseBinaryMatrix() = default;
  SparseBinaryMatrix(std::size_t nrows, std::size_t ncols) : nrows_(nrows), columns_(ncols) {}

  static SparseBinaryMatrix identity(std::size_t n) {
    SparseBinaryMatrix m(n, n);
    for (std::size_t j = 0; j < n; ++j) m.columns_[j].push_back(static_cast<Index>(j));
    return m;
  }

  std::size_t rows() const { return nrows_; }
  std::size_t cols() const { return columns_.size(); }

  std::span<const Index> col(std::size_t j) const { return columns_[j]; }

  void set_col(std::size_t j, std::vector<Index> entries) {
    if (std::adjacent_find(entries.begin(), entries.end(), std::greater_equal<>{}) != entries.end())
      throw Error("column " + std::to_string(j) + " rows are not strictly increasing");
    if (!entries.empty() && (entries.front() < 0 || static_cast<std::size_t>(entries.back()) >= nrows_))
      throw Error("column " + std::to_string(j) + " has a row out of range");
    columns_[j] = std::move(entries);
  }

  bool get(std::size_t i, std::size_t j) const {
    const auto& c = columns_[j];
    return std::binary_search(c.begin(), c.end(), static_cast<Index>(i));
  }

  /// Row of the lowest one in column j, or -1 for a zero column.
  Index low(std::size_t j) const { return columns_[j].empty() ? -1 : columns_[j].back(); }

  std::size_t nnz() const {
    std::size_t n = 0;
    for (const auto& c : columns_) n += c.size();
    return n;
  }

  /// column j += column i (mod 2). scratch is reused between calls.
  void add_column(std::size_t i, std::size_t j, std::vector<Index>& scratch) {
    add_into(columns_[j], columns_[i], scratch);
  }

  static void add_into(std::vector<Index>& target, std::span<const Index> source,
                       std::vector<Index>& scratch) {
    scratch.clear();
    std::set_symmetric_difference(target.begin(), target.end(), source.begin(), source.end(),
                                  std::back_inserter(scratch));
    target.swap(scratch);
  }

  SparseBinaryMatrix transpose() const {
    SparseBinaryMatrix t(cols(), rows());
    for (std::size_t j = 0; j < cols(); ++j)
      for (auto i : columns_[j]) t.columns_[i].push_back(static_cast<Index>(j));
    return t;
  }

  bool is_upper_unitriangular() const {
    if (rows() != cols()) return false;
    for (std::size_t j = 0; j < cols(); ++j) {
      const auto& c = columns_[j];
      if (c.empty() || c.back() != static_cast<Index>(j)) return false;
    }
    return true;
  }

  /// Lowest ones of nonzero columns sit in distinct rows.
  bool is_reduced() const {
    std::vector<char> seen(nrows_, 0);
    for (const auto& c : columns_) {
      if (c.empty()) continue;
      if (seen[c.back()]) return false;
      seen[c.back()] = 1;
    }
    return true;
  }

  friend SparseBinaryMatrix operator*(const SparseBinaryMatrix& a, const SparseBinaryMatrix& b) {
    if (a.cols() != b.rows()) throw Error("matrix shapes do not compose");
    SparseBinaryMatrix out(a.rows(), b.cols());
    std::vector<char> parity(a.rows(), 0), seen(a.rows(), 0);
    std::vector<Index> touched;
    for (std::size_t j = 0; j < b.cols(); ++j) {
      touched.clear();
      for (auto k : b.columns_[j])
        for (auto i : a.columns_[k]) {
          if (!seen[i]) {
            seen[i] = 1;
            touched.push_back(i);
          }
          parity[i] ^= 1;
        }
      auto& col = out.columns_[j];
      for (auto i : touched)
        if (parity[i]) col.push_back(i);
      for (auto i : touched) parity[i] = seen[i] = 0;
      std::sort(col.begin(), col.end());
    }
    return out;
  }

  friend bool operator==(const SparseBinaryMatrix&, const SparseBinaryMatrix&) = default;

 private:
  std::size_t nrows_ = 0;
  std::vector<std::vector<Index>> columns_;
};

/// Transpose with rows and columns taken in reverse order: the entry at
/// (r, c) moves to (cols - 1 - c, rows - 1 - r). An involution.
inline SparseBinaryMatrix anti_transpose(const SparseBinaryMatrix& m) {
  const std::size_t nr = m.rows(), nc = m.cols();
  std::vector<std::vector<Index>> out(nr);
  for (std::size_t c = nc; c-- > 0;)
    for (auto r : m.col(c)) out[nr - 1 - r].push_back(static_cast<Index>(nc - 1 - c));
  SparseBinaryMatrix t(nc, nr);
  for (std::size_t j = 0; j < nr; ++j) t.set_col(j, std::move(out[j]));
  return t;
}

}  // namespace critset
