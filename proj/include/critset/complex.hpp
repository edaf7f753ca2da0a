#pragma once

// Simplicial complexes, filtrations and lower-star constructions.
//
// A Complex holds the combinatorics only (vertex lists and the Hasse diagram)
// in the order the simplices were supplied ("input order"). A Filtration puts
// values on a Complex and sorts it; simplex ids are positions in that sorted
// order, so the columns of every boundary matrix are indexed by id ranges.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "critset/errors.hpp"

namespace critset {

using VertexId = std::int32_t;
using SimplexId = std::int32_t;

struct Simplex {
  SimplexId id = 0;
  std::span<const VertexId> vertices;

  int dim() const { return static_cast<int>(vertices.size()) - 1; }
};

namespace detail {

struct VertexListHash {
  std::size_t operator()(const std::vector<VertexId>& v) const noexcept {
    std::size_t h = v.size();
    for (VertexId x : v) h ^= std::hash<VertexId>{}(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

inline std::string format_vertices(std::span<const VertexId> vs) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < vs.size(); ++i) os << (i ? "," : "") << vs[i];
  os << '}';
  return os.str();
}

// Compressed adjacency lists.
struct Csr {
  std::vector<std::int32_t> offsets{0};
  std::vector<std::int32_t> items;

  std::span<const std::int32_t> operator[](std::size_t i) const {
    return {items.data() + offsets[i], items.data() + offsets[i + 1]};
  }
};

}  // namespace detail

class Complex {
 public:
  /// Builds a complex from vertex sets. Vertex sets are sorted; every proper
  /// face must be present or ClosureError is thrown.
  static Complex from_simplices(std::vector<std::vector<VertexId>> simplices) {
    Complex c;
    std::unordered_map<std::vector<VertexId>, std::int32_t, detail::VertexListHash> index;
    index.reserve(simplices.size() * 2);
    c.vertex_offsets_.reserve(simplices.size() + 1);
    for (std::size_t i = 0; i < simplices.size(); ++i) {
      auto& s = simplices[i];
      if (s.empty()) throw Error("simplex " + std::to_string(i) + " has no vertices");
      std::sort(s.begin(), s.end());
      if (std::adjacent_find(s.begin(), s.end()) != s.end())
        throw Error("simplex " + detail::format_vertices(s) + " repeats a vertex");
      if (!index.emplace(s, static_cast<std::int32_t>(i)).second)
        throw Error("duplicate simplex " + detail::format_vertices(s));
      c.vertices_.insert(c.vertices_.end(), s.begin(), s.end());
      c.vertex_offsets_.push_back(static_cast<std::int32_t>(c.vertices_.size()));
      c.max_dim_ = std::max(c.max_dim_, static_cast<int>(s.size()) - 1);
    }

    std::vector<VertexId> face;
    for (std::size_t i = 0; i < simplices.size(); ++i) {
      const auto& s = simplices[i];
      if (s.size() > 1) {
        for (std::size_t drop = 0; drop < s.size(); ++drop) {
          face.clear();
          for (std::size_t k = 0; k < s.size(); ++k)
            if (k != drop) face.push_back(s[k]);
          auto it = index.find(face);
          if (it == index.end())
            throw ClosureError("face " + detail::format_vertices(face) + " of " +
                               detail::format_vertices(s) + " is missing");
          c.facets_.items.push_back(it->second);
        }
      }
      c.facets_.offsets.push_back(static_cast<std::int32_t>(c.facets_.items.size()));
    }
    c.finish();
    return c;
  }

  std::size_t size() const { return vertex_offsets_.size() - 1; }
  int max_dim() const { return max_dim_; }
  int dim(std::size_t i) const { return vertex_offsets_[i + 1] - vertex_offsets_[i] - 1; }

  std::span<const VertexId> vertices(std::size_t i) const {
    return {vertices_.data() + vertex_offsets_[i], vertices_.data() + vertex_offsets_[i + 1]};
  }
  std::span<const std::int32_t> facets(std::size_t i) const { return facets_[i]; }
  std::span<const std::int32_t> cofacets(std::size_t i) const { return cofacets_[i]; }

  /// Input index of the 0-simplex with this vertex label, or -1.
  std::int32_t vertex_index(VertexId label) const {
    if (label < 0 || static_cast<std::size_t>(label) >= vertex_lookup_.size()) return -1;
    return vertex_lookup_[label];
  }
  /// One past the largest vertex label.
  std::size_t vertex_label_bound() const { return vertex_lookup_.size(); }

 private:
  Complex() = default;

  void finish() {
    std::vector<std::int32_t> count(size() + 1, 0);
    for (auto f : facets_.items) ++count[f + 1];
    std::partial_sum(count.begin(), count.end(), count.begin());
    cofacets_.offsets = count;
    cofacets_.items.resize(facets_.items.size());
    for (std::size_t i = 0; i < size(); ++i)
      for (auto f : facets_[i]) cofacets_.items[count[f]++] = static_cast<std::int32_t>(i);

    VertexId bound = 0;
    for (std::size_t i = 0; i < size(); ++i)
      if (dim(i) == 0) bound = std::max(bound, vertices(i)[0] + 1);
    vertex_lookup_.assign(bound, -1);
    for (std::size_t i = 0; i < size(); ++i)
      if (dim(i) == 0) {
        if (vertices(i)[0] < 0) throw Error("negative vertex label");
        vertex_lookup_[vertices(i)[0]] = static_cast<std::int32_t>(i);
      }
  }

  std::vector<VertexId> vertices_;
  std::vector<std::int32_t> vertex_offsets_{0};
  detail::Csr facets_;
  detail::Csr cofacets_;
  std::vector<std::int32_t> vertex_lookup_;
  int max_dim_ = -1;
};

/// A complex with values, sorted by (value, dimension, input index).
class Filtration {
 public:
  Filtration(std::shared_ptr<const Complex> complex, std::vector<double> values_by_input,
             std::vector<VertexId> argmax_by_input = {}, bool check_monotone = true)
      : complex_(std::move(complex)) {
    const std::size_t n = complex_->size();
    if (values_by_input.size() != n)
      throw Error("expected " + std::to_string(n) + " values, got " +
                  std::to_string(values_by_input.size()));
    for (std::size_t i = 0; i < n; ++i)
      if (!std::isfinite(values_by_input[i]))
        throw InvalidFieldError("non-finite value on simplex " +
                                detail::format_vertices(complex_->vertices(i)));
    if (check_monotone) {
      for (std::size_t i = 0; i < n; ++i)
        for (auto f : complex_->facets(i))
          if (values_by_input[f] > values_by_input[i])
            throw MonotonicityError("face " + detail::format_vertices(complex_->vertices(f)) +
                                    " has value above its coface " +
                                    detail::format_vertices(complex_->vertices(i)));
    }

    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0);
    std::sort(order_.begin(), order_.end(), [&](std::int32_t a, std::int32_t b) {
      if (values_by_input[a] != values_by_input[b]) return values_by_input[a] < values_by_input[b];
      if (complex_->dim(a) != complex_->dim(b)) return complex_->dim(a) < complex_->dim(b);
      return a < b;
    });

    id_of_input_.resize(n);
    values_.resize(n);
    local_.resize(n);
    by_dim_.assign(complex_->max_dim() + 1, {});
    if (!argmax_by_input.empty()) argmax_.resize(n);
    for (std::size_t id = 0; id < n; ++id) {
      const auto in = order_[id];
      id_of_input_[in] = static_cast<SimplexId>(id);
      values_[id] = values_by_input[in];
      auto& bucket = by_dim_[complex_->dim(in)];
      local_[id] = static_cast<std::int32_t>(bucket.size());
      bucket.push_back(static_cast<SimplexId>(id));
      if (!argmax_by_input.empty()) argmax_[id] = argmax_by_input[in];
    }
  }

  std::size_t size() const { return values_.size(); }
  int max_dim() const { return complex_->max_dim(); }
  const std::shared_ptr<const Complex>& complex() const { return complex_; }

  Simplex simplex(SimplexId id) const { return {id, complex_->vertices(order_.at(id))}; }
  int dim(SimplexId id) const { return complex_->dim(order_[id]); }
  double value(SimplexId id) const { return values_[id]; }
  std::span<const double> values() const { return values_; }

  /// Input indices in filtration order.
  std::span<const std::int32_t> order() const { return order_; }
  std::int32_t input_index(SimplexId id) const { return order_[id]; }
  SimplexId id_of_input(std::int32_t input) const { return id_of_input_[input]; }

  /// Ids of the p-simplices in filtration order (empty outside 0..max_dim).
  std::span<const SimplexId> by_dim(int p) const {
    if (p < 0 || p > max_dim()) return {};
    return by_dim_[p];
  }
  std::size_t count(int p) const { return by_dim(p).size(); }
  /// Position of a simplex among the simplices of its own dimension.
  std::int32_t local_index(SimplexId id) const { return local_[id]; }

  bool has_argmax() const { return !argmax_.empty(); }
  /// Vertex whose value a lower-star simplex inherits.
  VertexId argmax_vertex(SimplexId id) const { return argmax_.at(id); }

  SimplexId vertex_simplex(VertexId label) const {
    auto in = complex_->vertex_index(label);
    if (in < 0) throw NotFoundError("no vertex " + std::to_string(label));
    return id_of_input_[in];
  }

  std::vector<SimplexId> facets(SimplexId id) const {
    check(id);
    std::vector<SimplexId> out;
    for (auto f : complex_->facets(order_[id])) out.push_back(id_of_input_[f]);
    std::sort(out.begin(), out.end());
    return out;
  }
  std::vector<SimplexId> cofacets(SimplexId id) const {
    check(id);
    std::vector<SimplexId> out;
    for (auto f : complex_->cofacets(order_[id])) out.push_back(id_of_input_[f]);
    std::sort(out.begin(), out.end());
    return out;
  }

  /// All proper faces, by breadth-first search down the Hasse diagram.
  std::vector<SimplexId> faces(SimplexId id) const { return reach(id, true); }
  /// All proper cofaces, by breadth-first search up the Hasse diagram.
  std::vector<SimplexId> cofaces(SimplexId id) const { return reach(id, false); }

 private:
  void check(SimplexId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= size())
      throw NotFoundError("no simplex with id " + std::to_string(id));
  }

  std::vector<SimplexId> reach(SimplexId id, bool down) const {
    check(id);
    std::vector<std::int32_t> frontier{order_[id]};
    std::vector<SimplexId> out;
    std::unordered_map<std::int32_t, bool> seen;
    while (!frontier.empty()) {
      std::vector<std::int32_t> next;
      for (auto s : frontier)
        for (auto f : down ? complex_->facets(s) : complex_->cofacets(s))
          if (seen.emplace(f, true).second) {
            next.push_back(f);
            out.push_back(id_of_input_[f]);
          }
      frontier = std::move(next);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  std::shared_ptr<const Complex> complex_;
  std::vector<std::int32_t> order_;
  std::vector<SimplexId> id_of_input_;
  std::vector<double> values_;
  std::vector<std::int32_t> local_;
  std::vector<std::vector<SimplexId>> by_dim_;
  std::vector<VertexId> argmax_;
};

/// Filtration from explicit vertex sets and per-simplex values.
inline Filtration build_filtration(std::vector<std::vector<VertexId>> simplices,
                                   std::vector<double> values) {
  if (simplices.size() != values.size())
    throw Error("simplex and value counts differ");
  auto complex = std::make_shared<const Complex>(Complex::from_simplices(std::move(simplices)));
  return Filtration(std::move(complex), std::move(values));
}

// ---------------------------------------------------------------------------
// Lower-star filtrations

struct GridField {
  std::array<std::size_t, 3> shape{1, 1, 1};
  std::vector<double> values;  // x fastest

  std::size_t size() const { return shape[0] * shape[1] * shape[2]; }
  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const {
    return x + shape[0] * (y + shape[1] * z);
  }
};

inline std::shared_ptr<const Complex> path_complex(std::size_t n) {
  if (n == 0) throw EmptyInputError("empty signal");
  std::vector<std::vector<VertexId>> simplices;
  simplices.reserve(2 * n - 1);
  for (std::size_t i = 0; i < n; ++i) simplices.push_back({static_cast<VertexId>(i)});
  for (std::size_t i = 0; i + 1 < n; ++i)
    simplices.push_back({static_cast<VertexId>(i), static_cast<VertexId>(i + 1)});
  return std::make_shared<const Complex>(Complex::from_simplices(std::move(simplices)));
}

/// Freudenthal triangulation of a grid: every simplex is a chain
/// base, base + e(A1), base + e(A2), ... for nested axis sets A1 < A2 < ...
/// Each unit cube splits into 6 tetrahedra sharing its main diagonal.
inline std::shared_ptr<const Complex> freudenthal_complex(std::array<std::size_t, 3> shape) {
  for (auto s : shape)
    if (s == 0) throw InvalidFieldError("grid dimensions must be positive");

  // chains of nested nonempty axis masks, grouped by length
  std::array<std::vector<std::vector<unsigned>>, 4> chains;
  chains[0].push_back({});
  for (int len = 1; len <= 3; ++len)
    for (const auto& prev : chains[len - 1]) {
      unsigned last = prev.empty() ? 0u : prev.back();
      for (unsigned m = 1; m < 8; ++m)
        if ((m & last) == last && m != last) {
          auto c = prev;
          c.push_back(m);
          chains[len].push_back(std::move(c));
        }
    }

  const auto [nx, ny, nz] = shape;
  auto label = [&](std::size_t x, std::size_t y, std::size_t z) {
    return static_cast<VertexId>(x + nx * (y + ny * z));
  };
  std::vector<std::vector<VertexId>> simplices;
  for (const auto& group : chains)
    for (std::size_t z = 0; z < nz; ++z)
      for (std::size_t y = 0; y < ny; ++y)
        for (std::size_t x = 0; x < nx; ++x)
          for (const auto& chain : group) {
            unsigned top = chain.empty() ? 0u : chain.back();
            if (((top & 1u) && x + 1 >= nx) || ((top & 2u) && y + 1 >= ny) ||
                ((top & 4u) && z + 1 >= nz))
              continue;
            std::vector<VertexId> s{label(x, y, z)};
            for (unsigned m : chain) s.push_back(label(x + (m & 1u), y + ((m >> 1) & 1u), z + ((m >> 2) & 1u)));
            simplices.push_back(std::move(s));
          }
  return std::make_shared<const Complex>(Complex::from_simplices(std::move(simplices)));
}

/// Extends vertex values to simplices by maximum. Vertex labels index
/// vertex_values. The argmax vertex breaks ties by larger label, matching
/// the order of the vertices in the filtration.
inline Filtration lower_star(std::shared_ptr<const Complex> complex,
                             std::span<const double> vertex_values) {
  if (vertex_values.size() < complex->vertex_label_bound())
    throw Error("vertex value array is shorter than the vertex label range");
  for (double v : vertex_values)
    if (!std::isfinite(v)) throw InvalidFieldError("non-finite vertex value");
  const std::size_t n = complex->size();
  std::vector<double> values(n);
  std::vector<VertexId> argmax(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto vs = complex->vertices(i);
    VertexId best = vs[0];
    for (auto v : vs.subspan(1))
      if (vertex_values[v] >= vertex_values[best]) best = v;
    values[i] = vertex_values[best];
    argmax[i] = best;
  }
  return Filtration(std::move(complex), std::move(values), std::move(argmax), false);
}

inline Filtration lower_star_1d(std::span<const double> values) {
  if (values.empty()) throw EmptyInputError("empty signal");
  return lower_star(path_complex(values.size()), values);
}

inline Filtration lower_star_3d(const GridField& field) {
  if (field.values.size() != field.size())
    throw InvalidFieldError("field has " + std::to_string(field.values.size()) +
                            " values for shape of size " + std::to_string(field.size()));
  return lower_star(freudenthal_complex(field.shape), field.values);
}

/// Upper-star filtration, as the lower-star filtration of the negated field.
inline GridField negated(GridField field) {
  for (auto& v : field.values) v = -v;
  return field;
}

// ---------------------------------------------------------------------------
// I/O

inline GridField read_raw_f32(const std::string& path, std::array<std::size_t, 3> shape) {
  GridField field{shape, {}};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != field.size() * 4)
    throw ParseError(path + ": expected " + std::to_string(field.size() * 4) + " bytes, found " +
                     std::to_string(bytes.size()));
  field.values.resize(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, bytes.data() + 4 * i, 4);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    field.values[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  for (double v : field.values)
    if (!std::isfinite(v)) throw InvalidFieldError(path + ": non-finite value");
  return field;
}

inline void write_raw_f32(const std::string& path, std::span<const double> values) {
  std::vector<char> bytes(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    std::memcpy(bytes.data() + 4 * i, &bits, 4);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline std::vector<double> parse_signal(std::istream& in) {
  std::vector<double> out;
  std::string token;
  while (in >> token) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) throw ParseError("not a number: '" + token + "'");
    out.push_back(v);
  }
  return out;
}

inline std::vector<double> read_text_signal(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return parse_signal(in);
}

}  // namespace critset
