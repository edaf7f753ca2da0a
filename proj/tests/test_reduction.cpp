#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "critset/oracle.hpp"
#include "critset/reduction.hpp"

using namespace critset;

namespace {

SimplexId find(const Filtration& f, std::vector<VertexId> vs) {
  for (SimplexId s = 0; s < static_cast<SimplexId>(f.size()); ++s) {
    auto v = f.simplex(s).vertices;
    if (std::vector<VertexId>(v.begin(), v.end()) == vs) return s;
  }
  return -1;
}

std::vector<Index> col(const SparseBinaryMatrix& m, std::size_t j) {
  auto c = m.col(j);
  return {c.begin(), c.end()};
}

Filtration path021() { return build_filtration({{0}, {1}, {2}, {0, 1}, {1, 2}}, {0, 2, 1, 2, 2}); }

using PairKey = std::tuple<SimplexId, SimplexId>;

std::set<PairKey> keys(std::span<const PersistencePair> pairs) {
  std::set<PairKey> out;
  for (const auto& p : pairs) out.insert({p.birth_simplex, p.death_simplex});
  return out;
}

std::multiset<std::pair<double, double>> points(std::span<const PersistencePair> pairs, int dim) {
  std::multiset<std::pair<double, double>> out;
  for (const auto& p : pairs)
    if (p.dim == dim) out.insert({p.birth, p.death});
  return out;
}

// Lazy-reduction structure of U and V against low(), with zero columns reading as row -1.
void expect_lazy_structure(const Decomposition& dec) {
  const auto n = static_cast<Index>(dec.low.size());
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const bool u = dec.u.get(i, j), v = dec.v.get(i, j);
      if (dec.low[i] < dec.low[j]) {
        EXPECT_FALSE(u) << "U[" << i << "," << j << "]";
        EXPECT_FALSE(v) << "V[" << i << "," << j << "]";
      }
      if (u) {
        EXPECT_LE(dec.low[j], dec.low[i]);
      }
      if (v) {
        EXPECT_LE(dec.low[j], dec.low[i]);
      }
    }
}

void expect_decomposition(const SparseBinaryMatrix& d, const Decomposition& dec) {
  EXPECT_EQ(dec.r, d * dec.v);
  EXPECT_EQ(d, dec.r * dec.u);
  EXPECT_TRUE(dec.r.is_reduced());
  EXPECT_TRUE(dec.v.is_upper_unitriangular());
  EXPECT_TRUE(dec.u.is_upper_unitriangular());
  EXPECT_EQ(dec.v * dec.u, SparseBinaryMatrix::identity(d.cols()));
  for (std::size_t i = 0; i < dec.u_rows.size(); ++i)
    for (auto j : dec.u_row(i)) EXPECT_TRUE(dec.u.get(i, j));
  EXPECT_EQ(dec.u.transpose().nnz(), [&] {
    std::size_t n = 0;
    for (const auto& r : dec.u_rows) n += r.size();
    return n;
  }());
}

}  // namespace

TEST(SparseBinaryMatrix, ColumnAdditionIsSymmetricDifference) {
  SparseBinaryMatrix m(5, 2);
  m.set_col(0, {0, 2, 4});
  m.set_col(1, {1, 2});
  std::vector<Index> scratch;
  m.add_column(0, 1, scratch);
  EXPECT_EQ(col(m, 1), (std::vector<Index>{0, 1, 4}));
  EXPECT_EQ(m.low(1), 4);
  m.add_column(1, 1, scratch);
  EXPECT_EQ(m.low(1), -1);
}

TEST(SparseBinaryMatrix, RejectsUnsortedOrOutOfRange) {
  SparseBinaryMatrix m(3, 1);
  EXPECT_THROW(m.set_col(0, {2, 1}), Error);
  EXPECT_THROW(m.set_col(0, {1, 1}), Error);
  EXPECT_THROW(m.set_col(0, {3}), Error);
}

TEST(SparseBinaryMatrix, ProductOverGf2) {
  SparseBinaryMatrix a(2, 2), b(2, 1);
  a.set_col(0, {0, 1});
  a.set_col(1, {0, 1});
  b.set_col(0, {0, 1});
  auto c = a * b;
  EXPECT_TRUE(col(c, 0).empty());
}

TEST(BoundaryMatrix, EdgesOfTriangleHaveTwoOnes) {
  auto f = build_filtration({{0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}, {0, 1, 2}}, std::vector<double>(7, 0.0));
  auto d1 = boundary_matrix(f, 1);
  EXPECT_EQ(d1.rows(), 3u);
  EXPECT_EQ(d1.cols(), 3u);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(d1.col(j).size(), 2u);
  auto d2 = boundary_matrix(f, 2);
  ASSERT_EQ(d2.cols(), 1u);
  // rows are the edges in filtration order: ab, ac, bc
  EXPECT_EQ(col(d2, 0), (std::vector<Index>{0, 1, 2}));
}

TEST(BoundaryMatrix, NoSimplicesGivesNoColumns) {
  auto f = build_filtration({{0}, {1}, {0, 1}}, {0, 0, 0});
  EXPECT_EQ(boundary_matrix(f, 2).cols(), 0u);
  EXPECT_EQ(boundary_matrix(f, 0).rows(), 0u);
  EXPECT_THROW(boundary_matrix(f, 3), DimensionError);
  EXPECT_THROW(boundary_matrix(f, -1), DimensionError);
}

TEST(LazyReduce, PathPairs) {
  auto f = path021();
  auto pairs = read_pairs(f);
  const auto v0 = find(f, {0}), v1 = find(f, {1}), v2 = find(f, {2});
  const auto e01 = find(f, {0, 1}), e12 = find(f, {1, 2});
  EXPECT_EQ(keys(pairs), (std::set<PairKey>{{v1, e01}, {v2, e12}, {v0, kInfinite}}));
  EXPECT_EQ(points(pairs, 0), (std::multiset<std::pair<double, double>>{{0, INFINITY}, {1, 2}, {2, 2}}));
}

TEST(LazyReduce, PathVAndU) {
  auto f = path021();
  auto dec = lazy_reduce(boundary_matrix(f, 1));
  const auto e01 = f.local_index(find(f, {0, 1})), e12 = f.local_index(find(f, {1, 2}));
  EXPECT_EQ(col(dec.v, e12), (std::vector<Index>{e01, e12}));
  EXPECT_TRUE(dec.u.get(e01, e12));
  // e12 reduces to v0 + v2
  EXPECT_EQ(col(dec.r, e12), (std::vector<Index>{f.local_index(find(f, {0})), f.local_index(find(f, {2}))}));
}

TEST(LazyReduce, AlreadyReducedIsIdentity) {
  SparseBinaryMatrix d(3, 3);
  d.set_col(0, {0});
  d.set_col(1, {0, 1});
  d.set_col(2, {2});
  auto dec = lazy_reduce(d);
  EXPECT_EQ(dec.r, d);
  EXPECT_EQ(dec.v, SparseBinaryMatrix::identity(3));
  EXPECT_EQ(dec.u, SparseBinaryMatrix::identity(3));
}

TEST(LazyReduce, OptionsSkipVAndU) {
  auto f = oracle::random_filtration(3);
  auto d = boundary_matrix(f, 1);
  auto full = lazy_reduce(d), bare = lazy_reduce(d, {false, false});
  EXPECT_EQ(full.r, bare.r);
  EXPECT_EQ(full.low, bare.low);
  EXPECT_FALSE(bare.has_v);
  EXPECT_FALSE(bare.has_u);
}

TEST(AntiTranspose, Involution) {
  auto f = oracle::random_filtration(9);
  for (int p = 1; p <= f.max_dim(); ++p) {
    auto d = boundary_matrix(f, p);
    EXPECT_EQ(anti_transpose(anti_transpose(d)), d);
  }
}

TEST(AntiTranspose, IdentityIsFixed) {
  EXPECT_EQ(anti_transpose(SparseBinaryMatrix::identity(2)), SparseBinaryMatrix::identity(2));
}

TEST(AntiTranspose, SingleColumn) {
  SparseBinaryMatrix m(3, 1);
  m.set_col(0, {0});
  auto t = anti_transpose(m);
  EXPECT_EQ(t.rows(), 1u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_EQ(col(t, 2), (std::vector<Index>{0}));
  EXPECT_TRUE(t.col(0).empty());
  EXPECT_TRUE(t.col(1).empty());
}

TEST(AntiTranspose, EntryMap) {
  std::mt19937_64 rng(1);
  SparseBinaryMatrix m(4, 6);
  for (std::size_t j = 0; j < 6; ++j) {
    std::vector<Index> c;
    for (Index i = 0; i < 4; ++i)
      if (rng() % 2) c.push_back(i);
    m.set_col(j, c);
  }
  auto t = anti_transpose(m);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(t.get(i, j), m.get(3 - j, 5 - i));
}

TEST(ReadPairs, CircleWithEqualValues) {
  auto f = build_filtration({{0}, {1}, {2}, {3}, {0, 1}, {1, 2}, {2, 3}, {0, 3}}, std::vector<double>(8, 0.0));
  auto pairs = read_pairs(f);
  EXPECT_EQ(points(pairs, 0), (std::multiset<std::pair<double, double>>{{0, INFINITY}, {0, 0}, {0, 0}, {0, 0}}));
  EXPECT_EQ(points(pairs, 1), (std::multiset<std::pair<double, double>>{{0, INFINITY}}));
}

TEST(ReadPairs, InfinitePairsCountBettiNumbers) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    oracle::RandomFiltrationOptions opt;
    opt.max_dim = 1 + static_cast<int>(seed % 3);
    opt.n_vertices = 4 + seed % 7;
    auto f = oracle::random_filtration(seed, opt);
    auto betti = oracle::betti_numbers(f);
    auto pairs = read_pairs(f);
    for (int p = 0; p <= f.max_dim(); ++p) {
      auto inf = std::count_if(pairs.begin(), pairs.end(),
                               [&](const PersistencePair& q) { return q.dim == p && !q.finite(); });
      EXPECT_EQ(static_cast<std::size_t>(inf), betti[p]) << "seed " << seed << " dim " << p;
    }
  }
}

TEST(ReadPairs, PairInvariants) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto f = oracle::random_filtration(seed);
    std::set<SimplexId> seen;
    for (const auto& p : read_pairs(f)) {
      EXPECT_LE(p.birth, p.death);
      EXPECT_EQ(f.dim(p.birth_simplex), p.dim);
      EXPECT_TRUE(seen.insert(p.birth_simplex).second);
      if (p.finite()) {
        EXPECT_EQ(f.dim(p.death_simplex), p.dim + 1);
        EXPECT_TRUE(seen.insert(p.death_simplex).second);
      }
    }
    EXPECT_EQ(seen.size(), f.size());  // every simplex is in exactly one pair
  }
}

TEST(DualDecomposition, PathMatchesHomology) {
  auto f = path021();
  auto dual = dual_decomposition(f, 1);
  const std::size_t n = f.count(0);
  std::set<PairKey> got;
  auto edges = f.by_dim(1);
  auto verts = f.by_dim(0);
  for (std::size_t j = 0; j < dual.low.size(); ++j)
    if (dual.low[j] >= 0) got.insert({verts[n - 1 - j], edges[edges.size() - 1 - dual.low[j]]});
  EXPECT_EQ(got, (std::set<PairKey>{{find(f, {1}), find(f, {0, 1})}, {find(f, {2}), find(f, {1, 2})}}));
}

TEST(DualDecomposition, UnpairedClassificationAgrees) {
  // a lone vertex and an edge with an extra isolated vertex
  auto f = build_filtration({{0}, {1}, {2}, {0, 1}}, {0, 1, 2, 3});
  EXPECT_EQ(keys(read_pairs_cohomology(f)), keys(read_pairs(f)));
  auto g = build_filtration({{0}}, {0});
  EXPECT_EQ(keys(read_pairs_cohomology(g)), keys(read_pairs(g)));
}

TEST(DecompositionInvariants, RandomInstances) {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    oracle::RandomFiltrationOptions opt;
    opt.max_dim = 1 + static_cast<int>(seed % 3);
    opt.n_vertices = 4 + seed % 7;
    opt.max_simplices = 50;
    if (seed % 4 == 0) {
      opt.distinct = false;
      opt.distribution = oracle::ValueDistribution::FewLevels;
    }
    auto f = oracle::random_filtration(seed, opt);
    for (int p = 0; p <= f.max_dim() + 1; ++p) {
      auto d = boundary_matrix(f, p);
      auto dec = lazy_reduce(d);
      expect_decomposition(d, dec);
      expect_lazy_structure(dec);
      auto dd = anti_transpose(d);
      auto dual = lazy_reduce(dd);
      expect_decomposition(dd, dual);
      expect_lazy_structure(dual);
    }
  }
}

TEST(DecompositionInvariants, PairingEqualsTextbookReduction) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    oracle::RandomFiltrationOptions opt;
    opt.max_dim = 1 + static_cast<int>(seed % 3);
    opt.n_vertices = 4 + seed % 8;
    opt.max_simplices = 50;
    auto f = oracle::random_filtration(seed, opt);
    for (int p = 1; p <= f.max_dim(); ++p) {
      auto d = boundary_matrix(f, p);
      EXPECT_EQ(lazy_reduce(d).low, oracle::textbook_reduce(d).low) << "seed " << seed << " p " << p;
    }
  }
}

TEST(DecompositionInvariants, HomologyAndCohomologyPairingsAgree) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    oracle::RandomFiltrationOptions opt;
    opt.max_dim = 1 + static_cast<int>(seed % 3);
    opt.n_vertices = 3 + seed % 9;
    auto f = oracle::random_filtration(seed, opt);
    EXPECT_EQ(keys(read_pairs(f)), keys(read_pairs_cohomology(f))) << "seed " << seed;
  }
}

TEST(Reductions, CacheUpgradesOptions) {
  auto f = oracle::random_filtration(21);
  Reductions red(f);
  const auto& bare = red.homology(1, {false, false});
  EXPECT_FALSE(bare.has_v);
  const auto& full = red.homology(1, {true, true});
  EXPECT_TRUE(full.has_v);
  EXPECT_TRUE(full.has_u);
  EXPECT_TRUE(red.homology(1, {false, false}).has_v);
}

TEST(Reductions, PartnerAndPositivity) {
  auto f = path021();
  Reductions red(f);
  const auto v0 = find(f, {0}), v2 = find(f, {2}), e12 = find(f, {1, 2});
  EXPECT_EQ(red.partner(v2), e12);
  EXPECT_EQ(red.partner(e12), v2);
  EXPECT_EQ(red.partner(v0), kInfinite);
  EXPECT_TRUE(red.is_positive(v2));
  EXPECT_FALSE(red.is_positive(e12));
}

TEST(DiagramCsv, FormatAndRoundTrip) {
  auto f = build_filtration({{0}, {1}, {2}, {0, 1}, {1, 2}}, {0, 0.1, 1.0 / 3.0, 0.7, 2});
  auto pairs = read_pairs(f);
  std::ostringstream out;
  write_diagram_csv(out, pairs);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "dim,birth,death,birth_simplex,death_simplex");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ls(line);
    std::string dim, birth, death, bs, ds;
    std::getline(ls, dim, ',');
    std::getline(ls, birth, ',');
    std::getline(ls, death, ',');
    std::getline(ls, bs, ',');
    std::getline(ls, ds, ',');
    const auto& p = pairs[rows++];
    EXPECT_EQ(std::stoi(dim), p.dim);
    EXPECT_EQ(std::stod(birth), p.birth);
    if (p.finite()) {
      EXPECT_EQ(std::stod(death), p.death);
      EXPECT_EQ(std::stoi(ds), p.death_simplex);
    } else {
      EXPECT_EQ(death, "inf");
    }
    EXPECT_EQ(std::stoi(bs), p.birth_simplex);
  }
  EXPECT_EQ(rows, pairs.size());
}
