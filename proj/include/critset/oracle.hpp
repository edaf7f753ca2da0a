#pragma once

// Reference implementations used by the tests and the `verify` command.
//
// oracle_move follows the transposition procedure literally: it walks the
// same-dimension simplices between the current value and the target, tries
// each one on the far side of the accumulated block, recomputes the pairing
// from scratch, and keeps the simplex iff the pairing moved to it. It shares
// no code with the row/column extraction in bigstep.hpp.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <vector>

#include "critset/bigstep.hpp"
#include "critset/complex.hpp"
#include "critset/reduction.hpp"

namespace critset::oracle {

// ---------------------------------------------------------------------------
// Textbook reduction over dense bit columns

namespace detail {

using Bits = std::vector<std::uint64_t>;

inline Bits to_bits(std::span<const Index> col, std::size_t n) {
  Bits b((n + 63) / 64, 0);
  for (auto i : col) b[i / 64] |= std::uint64_t{1} << (i % 64);
  return b;
}

inline Index lowest(const Bits& b) {
  for (std::size_t w = b.size(); w-- > 0;)
    if (b[w]) return static_cast<Index>(w * 64 + 63 - std::countl_zero(b[w]));
  return -1;
}

inline bool test(const Bits& b, std::size_t i) { return (b[i / 64] >> (i % 64)) & 1u; }

inline void add(Bits& a, const Bits& b) {
  for (std::size_t w = 0; w < a.size(); ++w) a[w] ^= b[w];
}

inline std::vector<Index> to_list(const Bits& b, std::size_t n) {
  std::vector<Index> out;
  for (std::size_t i = 0; i < n; ++i)
    if (test(b, i)) out.push_back(static_cast<Index>(i));
  return out;
}

}  // namespace detail

/// Exhaustive left-to-right reduction: every column is reduced until its low
/// is new, then every remaining entry that is the low of an earlier column
/// is cleared too. U is obtained by inverting V.
inline Decomposition textbook_reduce(const SparseBinaryMatrix& d) {
  using namespace detail;
  const std::size_t n = d.cols(), m = d.rows();
  std::vector<Bits> r(n), v(n);
  std::vector<Index> pivot(m, -1);
  for (std::size_t j = 0; j < n; ++j) {
    r[j] = to_bits(d.col(j), m);
    v[j] = Bits((n + 63) / 64, 0);
    v[j][j / 64] |= std::uint64_t{1} << (j % 64);
    Index lo;
    while ((lo = lowest(r[j])) >= 0 && pivot[lo] >= 0) {
      add(r[j], r[pivot[lo]]);
      add(v[j], v[pivot[lo]]);
    }
    if (lo < 0) continue;
    for (Index row = lo - 1; row >= 0; --row)
      if (test(r[j], row) && pivot[row] >= 0) {
        add(r[j], r[pivot[row]]);
        add(v[j], v[pivot[row]]);
      }
    pivot[lo] = static_cast<Index>(j);
  }

  // V is unit upper triangular; solve V U = I column by column.
  std::vector<Bits> u(n, Bits((n + 63) / 64, 0));
  for (std::size_t j = 0; j < n; ++j) {
    Bits target((n + 63) / 64, 0);
    target[j / 64] |= std::uint64_t{1} << (j % 64);
    Bits x((n + 63) / 64, 0);
    // back substitution on rows j, j-1, ..., 0
    Bits residual = target;
    for (std::size_t k = j + 1; k-- > 0;)
      if (test(residual, k)) {
        x[k / 64] |= std::uint64_t{1} << (k % 64);
        add(residual, v[k]);
      }
    u[j] = x;
  }

  Decomposition dec;
  dec.r = SparseBinaryMatrix(m, n);
  dec.v = SparseBinaryMatrix(n, n);
  dec.u = SparseBinaryMatrix(n, n);
  dec.has_v = dec.has_u = true;
  dec.low.assign(n, -1);
  dec.pivot_col.assign(m, -1);
  dec.u_rows.assign(n, {});
  for (std::size_t j = 0; j < n; ++j) {
    dec.r.set_col(j, to_list(r[j], m));
    dec.v.set_col(j, to_list(v[j], n));
    dec.u.set_col(j, to_list(u[j], n));
    dec.low[j] = dec.r.low(j);
    if (dec.low[j] >= 0) dec.pivot_col[dec.low[j]] = static_cast<Index>(j);
    for (auto i : dec.u.col(j)) dec.u_rows[i].push_back(static_cast<Index>(j));
  }
  return dec;
}

/// Rank over GF(2) by plain Gaussian elimination.
inline std::size_t rank(const SparseBinaryMatrix& d) {
  using namespace detail;
  std::vector<Bits> cols;
  for (std::size_t j = 0; j < d.cols(); ++j) cols.push_back(to_bits(d.col(j), d.rows()));
  std::size_t rk = 0;
  std::vector<char> used(cols.size(), 0);
  for (std::size_t row = 0; row < d.rows(); ++row) {
    std::size_t piv = cols.size();
    for (std::size_t j = 0; j < cols.size(); ++j)
      if (!used[j] && test(cols[j], row)) {
        piv = j;
        break;
      }
    if (piv == cols.size()) continue;
    used[piv] = 1;
    ++rk;
    for (std::size_t j = 0; j < cols.size(); ++j)
      if (j != piv && test(cols[j], row)) add(cols[j], cols[piv]);
  }
  return rk;
}

inline std::vector<std::size_t> betti_numbers(const Filtration& filt) {
  std::vector<std::size_t> out;
  for (int p = 0; p <= filt.max_dim(); ++p) {
    const std::size_t rp = p == 0 ? 0 : rank(boundary_matrix(filt, p));
    const std::size_t rp1 = p == filt.max_dim() ? 0 : rank(boundary_matrix(filt, p + 1));
    out.push_back(filt.count(p) - rp - rp1);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pairing under arbitrary per-dimension orders

/// Order of the simplices of each dimension. Persistence pairing depends on
/// nothing else.
struct Arrangement {
  std::vector<std::vector<SimplexId>> order;  // order[p]: p-simplex ids
  std::vector<double> value;                  // by simplex id

  static Arrangement of(const Filtration& filt) {
    Arrangement a;
    for (int p = 0; p <= filt.max_dim(); ++p) {
      auto ids = filt.by_dim(p);
      a.order.emplace_back(ids.begin(), ids.end());
    }
    a.value.assign(filt.values().begin(), filt.values().end());
    return a;
  }

  /// Splits a global order (a permutation of all ids) into dimensions.
  static Arrangement of_global(const Filtration& filt, std::span<const SimplexId> global) {
    Arrangement a;
    a.order.assign(filt.max_dim() + 1, {});
    for (auto id : global) a.order[filt.dim(id)].push_back(id);
    a.value.assign(filt.values().begin(), filt.values().end());
    return a;
  }
};

struct Pairing {
  std::vector<SimplexId> partner;  // by simplex id; kInfinite when unpaired
  std::vector<char> negative;      // nonzero boundary column after reduction

  friend bool operator==(const Pairing&, const Pairing&) = default;
};

inline Pairing pairing_of(const Filtration& filt, const Arrangement& arr) {
  const auto n = filt.size();
  Pairing out{std::vector<SimplexId>(n, kInfinite), std::vector<char>(n, 0)};
  std::vector<Index> pos(n, 0);
  for (const auto& ids : arr.order)
    for (std::size_t k = 0; k < ids.size(); ++k) pos[ids[k]] = static_cast<Index>(k);
  for (int p = 1; p <= filt.max_dim(); ++p) {
    const auto& cols = arr.order[p];
    const auto& rows = arr.order[p - 1];
    SparseBinaryMatrix d(rows.size(), cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
      std::vector<Index> c;
      for (auto f : filt.facets(cols[j])) c.push_back(pos[f]);
      std::sort(c.begin(), c.end());
      d.set_col(j, c);
    }
    const auto dec = textbook_reduce(d);
    for (std::size_t j = 0; j < cols.size(); ++j)
      if (dec.low[j] >= 0) {
        const SimplexId s = rows[dec.low[j]], t = cols[j];
        out.partner[s] = t;
        out.partner[t] = s;
        out.negative[t] = 1;
      }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Critical sets by explicit moves

struct MoveResult {
  CriticalSet set;
  Arrangement final;  // block contiguous, rejected simplices moved past it
};

/// Moves req.mover() toward req.target one same-dimension simplex at a time.
inline MoveResult oracle_move(const Filtration& filt, Arrangement arr, const MoveRequest& req) {
  const SimplexId mover = req.mover();
  if (mover == kInfinite) throw Error("cannot move the death of an infinite pair");
  const int p = filt.dim(mover);
  const double from = arr.value[mover], to = req.target;
  const bool up = to > from;

  auto current = pairing_of(filt, arr);
  if (req.endpoint == Endpoint::Death) {
    if (!current.negative[mover] && (up || current.partner[mover] != kInfinite))
      throw WrongSimplexClassError("death move of a positive simplex");
  } else if (current.negative[mover]) {
    throw WrongSimplexClassError("birth move of a negative simplex");
  }

  // The candidate must take over the mover's partner (kInfinite: become
  // unpaired) without having had it before.
  auto role = [](const Pairing& pr, SimplexId s) { return pr.partner[s]; };
  const SimplexId anchor = role(current, mover);
  auto takes_over = [&](const Pairing& before, const Pairing& after, SimplexId c) {
    return role(after, c) == anchor && role(before, c) != anchor;
  };

  auto& ord = arr.order[p];
  auto where = [&](SimplexId id) {
    return static_cast<std::size_t>(std::find(ord.begin(), ord.end(), id) - ord.begin());
  };
  std::size_t first = where(mover), last = first;
  std::vector<SimplexId> block{mover};

  auto related = [&](SimplexId c) {
    for (auto b : block) {
      auto f = filt.faces(b);
      auto cf = filt.cofaces(b);
      if (std::binary_search(f.begin(), f.end(), c) || std::binary_search(cf.begin(), cf.end(), c)) return true;
    }
    return false;
  };

  if (from != to) {
    if (up) {
      while (last + 1 < ord.size()) {
        const SimplexId c = ord[last + 1];
        const double v = arr.value[c];
        if (v > to) break;
        if (v < from) {  // only possible with ties broken against the value order
          ++last;
          continue;
        }
        Arrangement trial = arr;
        auto& tord = trial.order[p];
        tord.erase(tord.begin() + static_cast<std::ptrdiff_t>(last + 1));
        tord.insert(tord.begin() + static_cast<std::ptrdiff_t>(first), c);
        if (related(c)) {
          block.push_back(c);
          ++last;
          continue;
        }
        auto next = pairing_of(filt, trial);
        if (takes_over(current, next, c)) {
          block.push_back(c);
          ++last;
        } else {
          ord.swap(trial.order[p]);
          current = std::move(next);
          ++first;
          ++last;
        }
      }
    } else {
      while (first > 0) {
        const SimplexId c = ord[first - 1];
        const double v = arr.value[c];
        if (v < to) break;
        if (v > from) {
          --first;
          continue;
        }
        Arrangement trial = arr;
        auto& tord = trial.order[p];
        tord.insert(tord.begin() + static_cast<std::ptrdiff_t>(last + 1), c);
        tord.erase(tord.begin() + static_cast<std::ptrdiff_t>(first - 1));
        if (related(c)) {
          block.push_back(c);
          --first;
          continue;
        }
        auto next = pairing_of(filt, trial);
        if (takes_over(current, next, c)) {
          block.push_back(c);
          --first;
        } else {
          ord.swap(trial.order[p]);
          current = std::move(next);
          --first;
          --last;
        }
      }
    }
  }

  std::sort(block.begin(), block.end());
  CriticalSet cs{mover, block, {}};
  if (from != to) {
    std::set<SimplexId> closure;
    for (auto b : block)
      for (auto s : up ? filt.cofaces(b) : filt.faces(b)) {
        const double v = filt.value(s);
        if ((up && v < to) || (!up && v > to))
          if (!std::binary_search(block.begin(), block.end(), s)) closure.insert(s);
      }
    cs.closure.assign(closure.begin(), closure.end());
  }
  return {std::move(cs), std::move(arr)};
}

inline CriticalSet oracle_move(const Filtration& filt, const MoveRequest& req) {
  return oracle_move(filt, Arrangement::of(filt), req).set;
}

// ---------------------------------------------------------------------------
// Consistency of the two critical sets of one pair

enum class Consistency { Consistent, Inconsistent, Exempt };

namespace detail {

/// Members of a contiguous block that, placed at its leading end (`front`
/// when increasing, the back when decreasing), become paired with `anchor`.
inline std::vector<SimplexId> critical_by_definition(const Filtration& filt, const Arrangement& arr,
                                                     std::span<const SimplexId> block, bool front,
                                                     SimplexId anchor) {
  const int p = filt.dim(block.front());
  const auto& ord = arr.order[p];
  std::vector<std::size_t> pos;
  for (auto s : block) pos.push_back(static_cast<std::size_t>(std::find(ord.begin(), ord.end(), s) - ord.begin()));
  const std::size_t end = front ? *std::min_element(pos.begin(), pos.end()) : *std::max_element(pos.begin(), pos.end());
  std::vector<SimplexId> out;
  for (std::size_t k = 0; k < block.size(); ++k) {
    Arrangement trial = arr;
    std::swap(trial.order[p][pos[k]], trial.order[p][end]);
    if (pairing_of(filt, trial).partner[block[k]] == anchor) out.push_back(block[k]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline Arrangement swapped(const Filtration& filt, Arrangement arr, SimplexId a, SimplexId b) {
  auto& ord = arr.order[filt.dim(a)];
  std::iter_swap(std::find(ord.begin(), ord.end(), a), std::find(ord.begin(), ord.end(), b));
  std::swap(arr.value[a], arr.value[b]);
  return arr;
}

}  // namespace detail

/// Moves both ends of the pair to their targets, then checks that swapping
/// tau with any tau' of the death set leaves the birth set unchanged, and
/// symmetrically. Membership is read off the blocks directly. Points of
/// multiplicity above one, before the move or once both blocks sit at the
/// targets, are exempt.
inline Consistency check_consistency(const Filtration& filt, const PersistencePair& pair, double birth_target,
                                     double death_target) {
  if (!pair.finite()) throw Error("consistency needs a finite pair");
  if (birth_target > death_target) throw Error("birth target above death target");
  Reductions red(filt);
  int multiplicity = 0;
  for (const auto& q : red.finite_pairs(pair.dim))
    if (q.birth == pair.birth && q.death == pair.death) ++multiplicity;
  if (multiplicity > 1) return Consistency::Exempt;

  const SimplexId sigma = pair.birth_simplex, tau = pair.death_simplex;
  const auto dmove = oracle_move(filt, Arrangement::of(filt), {pair, Endpoint::Death, death_target});
  const auto bmove = oracle_move(filt, dmove.final, {pair, Endpoint::Birth, birth_target});
  const auto& arr = bmove.final;
  const auto& death_block = dmove.set.members;
  const auto& birth_block = bmove.set.members;
  const bool death_front = death_target > pair.death, birth_front = birth_target > pair.birth;

  const auto moved = pairing_of(filt, arr);
  int between = 0;
  for (auto s : birth_block)
    if (std::binary_search(death_block.begin(), death_block.end(), moved.partner[s])) ++between;
  if (between > 1) return Consistency::Exempt;

  const auto x_sigma = detail::critical_by_definition(filt, arr, death_block, death_front, sigma);
  const auto x_tau = detail::critical_by_definition(filt, arr, birth_block, birth_front, tau);
  for (auto t : x_sigma) {
    if (t == tau) continue;
    auto a = detail::swapped(filt, arr, tau, t);
    if (pairing_of(filt, a).partner[sigma] != t) return Consistency::Inconsistent;
    if (detail::critical_by_definition(filt, a, birth_block, birth_front, t) != x_tau)
      return Consistency::Inconsistent;
  }
  for (auto s : x_tau) {
    if (s == sigma) continue;
    auto a = detail::swapped(filt, arr, sigma, s);
    if (pairing_of(filt, a).partner[tau] != s) return Consistency::Inconsistent;
    if (detail::critical_by_definition(filt, a, death_block, death_front, s) != x_sigma)
      return Consistency::Inconsistent;
  }
  return Consistency::Consistent;
}

// ---------------------------------------------------------------------------
// Random instances

enum class ValueDistribution { Uniform, Gaussian, FewLevels };

struct RandomFiltrationOptions {
  std::size_t n_vertices = 8;
  int max_dim = 2;
  std::size_t max_simplices = 40;
  double edge_probability = 0.5;
  ValueDistribution distribution = ValueDistribution::Uniform;
  bool distinct = true;
};

/// Clique complex of a random graph, truncated to max_simplices while
/// staying closed under faces. Raw values are raised to the maximum over
/// faces; with `distinct`, a rank-proportional jitter separates ties.
inline Filtration random_filtration(std::uint64_t seed, const RandomFiltrationOptions& opt = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> level(0, 3);
  auto draw = [&] {
    switch (opt.distribution) {
      case ValueDistribution::Uniform: return unit(rng);
      case ValueDistribution::Gaussian: return normal(rng);
      case ValueDistribution::FewLevels: return static_cast<double>(level(rng));
    }
    return 0.0;
  };

  const auto nv = static_cast<VertexId>(opt.n_vertices);
  std::vector<std::vector<char>> adj(nv, std::vector<char>(nv, 0));
  for (VertexId a = 0; a < nv; ++a)
    for (VertexId b = a + 1; b < nv; ++b) adj[a][b] = adj[b][a] = unit(rng) < opt.edge_probability;

  std::vector<std::vector<VertexId>> simplices;
  std::set<std::vector<VertexId>> present;
  std::vector<std::vector<VertexId>> layer;
  for (VertexId v = 0; v < nv && simplices.size() < opt.max_simplices; ++v) {
    simplices.push_back({v});
    present.insert({v});
    layer.push_back({v});
  }
  for (int p = 1; p <= opt.max_dim; ++p) {
    std::vector<std::vector<VertexId>> next;
    for (const auto& s : layer)
      for (VertexId v = s.back() + 1; v < nv; ++v) {
        if (!std::all_of(s.begin(), s.end(), [&](VertexId u) { return adj[u][v]; })) continue;
        auto t = s;
        t.push_back(v);
        next.push_back(std::move(t));
      }
    std::shuffle(next.begin(), next.end(), rng);
    std::vector<std::vector<VertexId>> kept;
    for (auto& t : next) {
      if (simplices.size() >= opt.max_simplices) break;
      bool closed = true;
      for (std::size_t k = 0; k < t.size() && closed; ++k) {
        auto f = t;
        f.erase(f.begin() + static_cast<std::ptrdiff_t>(k));
        closed = present.count(f) > 0;
      }
      if (!closed) continue;
      present.insert(t);
      simplices.push_back(t);
      kept.push_back(t);
    }
    std::sort(kept.begin(), kept.end());
    layer = std::move(kept);
  }

  auto complex = std::make_shared<const Complex>(Complex::from_simplices(simplices));
  std::vector<double> values(complex->size());
  for (std::size_t i = 0; i < complex->size(); ++i) {  // faces precede cofaces in `simplices`
    double v = draw();
    for (auto f : complex->facets(i)) v = std::max(v, values[f]);
    values[i] = v;
  }
  if (opt.distinct) {
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (values[a] != values[b]) return values[a] < values[b];
      if (complex->dim(a) != complex->dim(b)) return complex->dim(a) < complex->dim(b);
      return a < b;
    });
    for (std::size_t k = 0; k < idx.size(); ++k) values[idx[k]] += 1e-9 * static_cast<double>(k);
  }
  return Filtration(complex, std::move(values));
}

/// Random signal of distinct values.
inline std::vector<double> random_signal(std::uint64_t seed, std::size_t length) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> out(length);
  for (auto& v : out) v = unit(rng);
  return out;
}

}  // namespace critset::oracle
