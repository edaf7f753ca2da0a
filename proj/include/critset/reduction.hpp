#pragma once

// Boundary matrices, the lazy R = DV / D = RU reduction, and persistence
// pairing for homology and (through the anti-transpose) cohomology.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "critset/complex.hpp"
#include "critset/sparse_matrix.hpp"

namespace critset {

/// Process-wide count of column additions performed by lazy_reduce.
inline std::atomic<std::uint64_t>& column_additions() {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}

/// Columns are the p-simplices, rows the (p-1)-simplices, both in filtration
/// order. D_0 has no rows; D_{d+1} has no columns.
inline SparseBinaryMatrix boundary_matrix(const Filtration& filt, int p) {
  if (p < 0 || p > filt.max_dim() + 1)
    throw DimensionError("no boundary matrix in dimension " + std::to_string(p) +
                         " for a complex of dimension " + std::to_string(filt.max_dim()));
  auto cols = filt.by_dim(p);
  SparseBinaryMatrix d(filt.count(p - 1), cols.size());
  std::vector<Index> column;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    column.clear();
    for (auto f : filt.complex()->facets(filt.input_index(cols[j])))
      column.push_back(filt.local_index(filt.id_of_input(f)));
    std::sort(column.begin(), column.end());
    d.set_col(j, column);
  }
  return d;
}

struct ReduceOptions {
  bool compute_v = true;
  bool compute_u = true;
};

struct Decomposition {
  SparseBinaryMatrix r;
  SparseBinaryMatrix v;  // empty unless requested
  SparseBinaryMatrix u;  // empty unless requested
  std::vector<Index> low;        // per column, -1 for a zero column
  std::vector<Index> pivot_col;  // per row, the column whose low it is, or -1
  std::vector<std::vector<Index>> u_rows;  // transposed U, built with U

  bool has_v = false;
  bool has_u = false;

  std::span<const Index> u_row(std::size_t i) const { return u_rows[i]; }
};

/// Reduces D column by column, each column adding earlier columns with the
/// same lowest one until its low is unique. U[i, j] is set whenever column i
/// is added into column j; over GF(2) the multiplier is always 1.
inline Decomposition lazy_reduce(const SparseBinaryMatrix& d, ReduceOptions opts = {}) {
  const std::size_t n = d.cols();
  Decomposition dec;
  dec.r = d;
  dec.has_v = opts.compute_v;
  dec.has_u = opts.compute_u;
  if (opts.compute_v) dec.v = SparseBinaryMatrix::identity(n);
  std::vector<std::vector<Index>> u_cols;
  if (opts.compute_u) u_cols.resize(n);
  dec.low.assign(n, -1);
  dec.pivot_col.assign(d.rows(), -1);

  std::vector<Index> scratch;
  std::vector<Index> vcol;
  std::uint64_t additions = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (opts.compute_v) vcol.assign(dec.v.col(j).begin(), dec.v.col(j).end());
    Index lo;
    while ((lo = dec.r.low(j)) >= 0 && dec.pivot_col[lo] >= 0) {
      const auto i = static_cast<std::size_t>(dec.pivot_col[lo]);
      dec.r.add_column(i, j, scratch);
      if (opts.compute_v) SparseBinaryMatrix::add_into(vcol, dec.v.col(i), scratch);
      if (opts.compute_u) u_cols[j].push_back(static_cast<Index>(i));
      ++additions;
    }
    if (opts.compute_v) dec.v.set_col(j, vcol);
    if (lo >= 0) dec.pivot_col[lo] = static_cast<Index>(j);
    dec.low[j] = lo;
  }
  column_additions() += additions;

  if (opts.compute_u) {
    dec.u = SparseBinaryMatrix(n, n);
    dec.u_rows.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      auto& c = u_cols[j];
      c.push_back(static_cast<Index>(j));
      std::sort(c.begin(), c.end());
      for (auto i : c) dec.u_rows[i].push_back(static_cast<Index>(j));
      dec.u.set_col(j, std::move(c));
    }
  }
  return dec;
}

/// Decomposition of the anti-transposed D_p. Its columns are the
/// (p-1)-simplices in reverse filtration order, its rows the p-simplices in
/// reverse order.
inline Decomposition dual_decomposition(const Filtration& filt, int p, ReduceOptions opts = {}) {
  return lazy_reduce(anti_transpose(boundary_matrix(filt, p)), opts);
}

// ---------------------------------------------------------------------------

inline constexpr SimplexId kInfinite = -1;

struct PersistencePair {
  SimplexId birth_simplex = 0;
  SimplexId death_simplex = kInfinite;
  double birth = 0;
  double death = std::numeric_limits<double>::infinity();
  int dim = 0;

  bool finite() const { return death_simplex != kInfinite; }
  double persistence() const { return death - birth; }
  friend bool operator==(const PersistencePair&, const PersistencePair&) = default;
};

/// Caches the decompositions of one filtration, computed on first use.
/// homology(p) reduces D_p; cohomology(q) reduces the anti-transpose of
/// D_{q+1}, so its columns are the q-simplices. Not thread-safe.
class Reductions {
 public:
  explicit Reductions(const Filtration& filt) : filt_(&filt) {
    homology_.resize(filt.max_dim() + 2);
    cohomology_.resize(filt.max_dim() + 1);
  }

  const Filtration& filtration() const { return *filt_; }

  const Decomposition& homology(int p, ReduceOptions opts = {}) {
    return get(homology_, p, opts, [&] { return boundary_matrix(*filt_, p); });
  }
  const Decomposition& cohomology(int q, ReduceOptions opts = {}) {
    return get(cohomology_, q, opts, [&] { return anti_transpose(boundary_matrix(*filt_, q + 1)); });
  }
  bool has_cohomology(int q) const {
    return q >= 0 && q < static_cast<int>(cohomology_.size()) && cohomology_[q].has_value();
  }

  /// Finite pairs (sigma, tau) with dim sigma = p, read from the lows of R_{p+1}.
  std::vector<PersistencePair> finite_pairs(int p, ReduceOptions opts = {false, false}) {
    std::vector<PersistencePair> out;
    if (p < 0 || p >= filt_->max_dim()) return out;
    const auto& dec = homology(p + 1, opts);
    auto cols = filt_->by_dim(p + 1);
    auto rows = filt_->by_dim(p);
    for (std::size_t j = 0; j < cols.size(); ++j)
      if (dec.low[j] >= 0) {
        SimplexId s = rows[dec.low[j]], t = cols[j];
        out.push_back({s, t, filt_->value(s), filt_->value(t), p});
      }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.birth_simplex < b.birth_simplex; });
    return out;
  }

  /// Full diagram in dimension p, including infinite pairs.
  std::vector<PersistencePair> pairs(int p, ReduceOptions opts = {false, false}) {
    auto out = finite_pairs(p, opts);
    if (p < 0 || p > filt_->max_dim()) return out;
    const auto& here = homology(p, opts);
    std::vector<char> killed(filt_->count(p), 0);
    if (p < filt_->max_dim()) {
      const auto& above = homology(p + 1, opts);
      for (auto lo : above.low)
        if (lo >= 0) killed[lo] = 1;
    }
    auto ids = filt_->by_dim(p);
    for (std::size_t j = 0; j < ids.size(); ++j)
      if (here.low[j] < 0 && !killed[j])
        out.push_back({ids[j], kInfinite, filt_->value(ids[j]),
                       std::numeric_limits<double>::infinity(), p});
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.birth_simplex < b.birth_simplex; });
    return out;
  }

  /// Is the simplex a zero column of its own boundary matrix?
  bool is_positive(SimplexId id) {
    const int p = filt_->dim(id);
    return homology(p, {false, false}).low[filt_->local_index(id)] < 0;
  }

  /// The simplex paired with id, or kInfinite. Negative simplices give
  /// their birth simplex, positive ones their death simplex.
  SimplexId partner(SimplexId id) {
    const int p = filt_->dim(id);
    const auto local = filt_->local_index(id);
    const auto& here = homology(p, {false, false});
    if (here.low[local] >= 0) return filt_->by_dim(p - 1)[here.low[local]];
    if (p >= filt_->max_dim()) return kInfinite;
    const auto& above = homology(p + 1, {false, false});
    auto col = above.pivot_col[local];
    return col < 0 ? kInfinite : filt_->by_dim(p + 1)[col];
  }

 private:
  struct Entry {
    Decomposition dec;
    ReduceOptions opts;
  };

  template <class Build>
  const Decomposition& get(std::vector<std::optional<Entry>>& cache, int p, ReduceOptions opts,
                           Build&& build) {
    if (p < 0 || p >= static_cast<int>(cache.size()))
      throw DimensionError("no decomposition in dimension " + std::to_string(p));
    auto& slot = cache[p];
    if (!slot || (opts.compute_v && !slot->opts.compute_v) || (opts.compute_u && !slot->opts.compute_u)) {
      ReduceOptions merged = opts;
      if (slot) {
        merged.compute_v |= slot->opts.compute_v;
        merged.compute_u |= slot->opts.compute_u;
      }
      slot = Entry{lazy_reduce(build(), merged), merged};
    }
    return slot->dec;
  }

  const Filtration* filt_;
  std::vector<std::optional<Entry>> homology_;
  std::vector<std::optional<Entry>> cohomology_;
};

/// Every persistence pair of the filtration, sorted by dimension and birth.
inline std::vector<PersistencePair> read_pairs(const Filtration& filt) {
  Reductions red(filt);
  std::vector<PersistencePair> out;
  for (int p = 0; p <= filt.max_dim(); ++p) {
    auto dim = red.pairs(p);
    out.insert(out.end(), dim.begin(), dim.end());
  }
  return out;
}

/// Pairs read from the cohomology decompositions: low R^perp[sigma] = tau.
/// Unpaired simplices are the zero columns of R^perp_{p+1} that are not a
/// low of R^perp_p.
inline std::vector<PersistencePair> read_pairs_cohomology(const Filtration& filt) {
  std::vector<PersistencePair> out;
  Reductions red(filt);
  for (int p = 0; p <= filt.max_dim(); ++p) {
    const auto& dual = red.cohomology(p, {false, false});
    auto sigmas = filt.by_dim(p);
    auto taus = filt.by_dim(p + 1);
    const auto ns = sigmas.size(), nt = taus.size();
    std::vector<char> is_low(ns, 0);
    if (p > 0) {
      // lows of the dual matrix one dimension down are p-simplices
      const auto& below = red.cohomology(p - 1, {false, false});
      for (auto lo : below.low)
        if (lo >= 0) is_low[ns - 1 - lo] = 1;
    }
    for (std::size_t c = 0; c < ns; ++c) {
      SimplexId s = sigmas[ns - 1 - c];
      if (dual.low[c] >= 0) {
        SimplexId t = taus[nt - 1 - dual.low[c]];
        out.push_back({s, t, filt.value(s), filt.value(t), p});
      } else if (!is_low[ns - 1 - c]) {
        out.push_back({s, kInfinite, filt.value(s), std::numeric_limits<double>::infinity(), p});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.dim, a.birth_simplex) < std::tie(b.dim, b.birth_simplex);
  });
  return out;
}

inline std::string format_value(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

/// CSV: dim,birth,death,birth_simplex,death_simplex. Infinite deaths are
/// written as `inf` with death_simplex -1.
inline void write_diagram_csv(std::ostream& out, std::span<const PersistencePair> pairs) {
  out << "dim,birth,death,birth_simplex,death_simplex\n";
  for (const auto& p : pairs)
    out << p.dim << ',' << format_value(p.birth) << ',' << format_value(p.death) << ','
        << p.birth_simplex << ',' << p.death_simplex << '\n';
}

}  // namespace critset
