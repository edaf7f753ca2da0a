#pragma once

// Partial matchings of diagram points to targets, for the simplification
// loss and the sublevel-set quadrant loss.

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "critset/bigstep.hpp"
#include "critset/reduction.hpp"

namespace critset {

enum class SimplifyMode { Midpoint, BirthUp, DeathDown };
enum class LossKind { Simplify, Quadrant };

struct MatchEntry {
  PersistencePair pair;
  double target_birth = 0;
  double target_death = 0;
};

struct Matching {
  std::vector<MatchEntry> entries;
};

/// Points on the diagonal are already at their target and are never matched.
inline bool on_diagonal(const PersistencePair& p) { return p.finite() && p.death == p.birth; }

/// Finite points with d - b <= eps go to the diagonal: the midpoint, (d, d)
/// for BirthUp, or (b, b) for DeathDown.
inline Matching simplification_matching(std::span<const PersistencePair> diagram, double eps,
                                        SimplifyMode mode = SimplifyMode::Midpoint) {
  Matching m;
  for (const auto& p : diagram) {
    if (!p.finite() || on_diagonal(p) || p.persistence() > eps) continue;
    double tb = 0, td = 0;
    switch (mode) {
      case SimplifyMode::Midpoint: tb = td = 0.5 * (p.birth + p.death); break;
      case SimplifyMode::BirthUp: tb = td = p.death; break;
      case SimplifyMode::DeathDown: tb = td = p.birth; break;
    }
    m.entries.push_back({p, tb, td});
  }
  return m;
}

/// Points in the quadrant b <= a <= d go to the nearer of (b, a) and (a, d);
/// equal distances lower the death.
inline Matching quadrant_matching(std::span<const PersistencePair> diagram, double a) {
  Matching m;
  for (const auto& p : diagram) {
    if (!p.finite() || on_diagonal(p) || p.birth > a || p.death < a) continue;
    if (p.death - a <= a - p.birth)
      m.entries.push_back({p, p.birth, a});
    else
      m.entries.push_back({p, a, p.death});
  }
  return m;
}

struct LossSpec {
  LossKind kind = LossKind::Simplify;
  double eps = std::numeric_limits<double>::infinity();
  SimplifyMode mode = SimplifyMode::Midpoint;
  double threshold = 0;      // quadrant corner a
  std::vector<int> dims{0};  // diagram dimensions the loss sees

  Matching match(std::span<const PersistencePair> diagram) const {
    return kind == LossKind::Simplify ? simplification_matching(diagram, eps, mode)
                                      : quadrant_matching(diagram, threshold);
  }
};

namespace detail {
inline double matched_sum(std::span<const PersistencePair> diagram, const Matching& matching, bool& stale) {
  double loss = 0;
  stale = false;
  for (const auto& e : matching.entries) {
    auto it = std::find_if(diagram.begin(), diagram.end(), [&](const PersistencePair& p) {
      return p.birth_simplex == e.pair.birth_simplex && p.death_simplex == e.pair.death_simplex;
    });
    if (it == diagram.end()) {
      stale = true;
      return 0;
    }
    const double db = it->birth - e.target_birth, dd = it->death - e.target_death;
    loss += db * db + dd * dd;
  }
  return loss;
}
}  // namespace detail

/// Sum of squared distances from each matched point, looked up again in the
/// current diagram by its simplices, to its target. When a matched pair is
/// gone the matching is rebuilt from `spec`; without a spec that is an error.
inline double diagram_loss(std::span<const PersistencePair> diagram, const Matching& matching,
                           const LossSpec* spec = nullptr) {
  bool stale = false;
  double loss = detail::matched_sum(diagram, matching, stale);
  if (!stale) return loss;
  if (!spec) throw NotFoundError("matched pair no longer in the diagram");
  return detail::matched_sum(diagram, spec->match(diagram), stale);
}

/// The literal simplification loss: sum of (d - b)^2 over finite points with d - b <= eps.
inline double simplification_loss(std::span<const PersistencePair> diagram, double eps) {
  double loss = 0;
  for (const auto& p : diagram)
    if (p.finite() && p.persistence() <= eps) loss += p.persistence() * p.persistence();
  return loss;
}

/// One birth and one death request per matched point.
inline std::vector<MoveRequest> move_requests(const Matching& matching) {
  std::vector<MoveRequest> out;
  out.reserve(2 * matching.entries.size());
  for (const auto& e : matching.entries) {
    out.push_back({e.pair, Endpoint::Birth, e.target_birth});
    out.push_back({e.pair, Endpoint::Death, e.target_death});
  }
  return out;
}

}  // namespace critset
