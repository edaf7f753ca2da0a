#pragma once

// Critical sets of singleton losses and their combination into one gradient.
//
// Moving one endpoint of a persistence pair from value a to a' drags along
// every simplex of the same dimension that would take over the pairing as
// the mover passes it. Those simplices are read directly off the lazy
// decompositions:
//
//   increase death of tau     row    U[tau]          (cofaces follow)
//   decrease death of tau     column V[tau]          (faces follow)
//   increase birth of sigma   column Vperp[sigma]    (cofaces follow)
//   decrease birth of sigma   row    Uperp[sigma]    (faces follow)
//     ... of an infinite pair column V[sigma]
//
// keeping only entries whose value lies between a and a'.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "critset/complex.hpp"
#include "critset/reduction.hpp"

namespace critset {

enum class Endpoint { Birth, Death };

struct MoveRequest {
  PersistencePair pair;
  Endpoint endpoint = Endpoint::Death;
  double target = 0;

  SimplexId mover() const { return endpoint == Endpoint::Birth ? pair.birth_simplex : pair.death_simplex; }
};

struct CriticalSet {
  SimplexId mover = 0;
  std::vector<SimplexId> members;  // sorted, includes the mover
  std::vector<SimplexId> closure;  // faces or cofaces dragged along, sorted
};

using SimplexValues = std::unordered_map<SimplexId, double>;
using VertexValues = std::unordered_map<VertexId, double>;

struct TargetAssignment {
  std::unordered_map<SimplexId, std::vector<double>> targets;
  std::unordered_map<SimplexId, VertexId> argmax_vertex;  // lower-star only
};

namespace detail {

inline std::string describe(const Filtration& filt, SimplexId id) {
  return "simplex " + std::to_string(id) + " " + format_vertices(filt.simplex(id).vertices) +
         " (f=" + format_value(filt.value(id)) + ")";
}

/// Faces (going down) or cofaces (going up) of the members whose value must
/// change for the new values to stay monotone: cofaces with f < target when
/// increasing, faces with f > target when decreasing.
inline std::vector<SimplexId> dragged(const Filtration& filt, std::span<const SimplexId> members,
                                      double target, bool up) {
  const auto& cx = *filt.complex();
  std::unordered_map<std::int32_t, char> visited;
  std::vector<std::int32_t> frontier;
  for (auto m : members) visited.emplace(filt.input_index(m), 1);
  for (auto m : members) frontier.push_back(filt.input_index(m));
  std::vector<SimplexId> out;
  while (!frontier.empty()) {
    std::vector<std::int32_t> next;
    for (auto s : frontier)
      for (auto f : up ? cx.cofacets(s) : cx.facets(s)) {
        const SimplexId id = filt.id_of_input(f);
        const double v = filt.value(id);
        if (up ? !(v < target) : !(v > target)) continue;
        if (!visited.emplace(f, 1).second) continue;
        out.push_back(id);
        next.push_back(f);
      }
    frontier = std::move(next);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline CriticalSet finish(const Filtration& filt, SimplexId mover, std::vector<SimplexId> members,
                          double target, bool up, bool with_closure) {
  std::sort(members.begin(), members.end());
  CriticalSet cs{mover, std::move(members), {}};
  if (with_closure) cs.closure = dragged(filt, cs.members, target, up);
  return cs;
}

inline void check_target(double target) {
  if (!std::isfinite(target)) throw Error("move target must be finite");
}

}  // namespace detail

/// Negative tau moving up to target: { tau_i | f(tau) <= f(tau_i) <= target, U[tau, tau_i] != 0 }.
inline CriticalSet critical_set_increase_death(Reductions& red, SimplexId tau, double target,
                                               bool with_closure = true) {
  const auto& filt = red.filtration();
  detail::check_target(target);
  const double d = filt.value(tau);
  if (target < d) throw DirectionError("increase target below current value of " + detail::describe(filt, tau));
  const int p = filt.dim(tau);
  const auto local = filt.local_index(tau);
  if (red.homology(p, {false, false}).low[local] < 0)
    throw WrongSimplexClassError("increase death needs a negative simplex; " + detail::describe(filt, tau) +
                                 " is positive");
  if (target == d) return {tau, {tau}, {}};
  const auto& dec = red.homology(p, {false, true});
  auto ids = filt.by_dim(p);
  std::vector<SimplexId> members;
  for (auto j : dec.u_row(local)) {
    const SimplexId id = ids[j];
    const double v = filt.value(id);
    if (v > target) break;
    if (v >= d) members.push_back(id);
  }
  return detail::finish(filt, tau, std::move(members), target, true, with_closure);
}

/// Negative (or positive unpaired) tau moving down to target:
/// { tau_i | target <= f(tau_i) <= f(tau), V[tau_i, tau] != 0 }.
inline CriticalSet critical_set_decrease_death(Reductions& red, SimplexId tau, double target,
                                               bool with_closure = true) {
  const auto& filt = red.filtration();
  detail::check_target(target);
  const double d = filt.value(tau);
  if (target > d) throw DirectionError("decrease target above current value of " + detail::describe(filt, tau));
  const int p = filt.dim(tau);
  const auto local = filt.local_index(tau);
  if (red.homology(p, {false, false}).low[local] < 0 && red.partner(tau) != kInfinite)
    throw WrongSimplexClassError("cannot decrease " + detail::describe(filt, tau) +
                                 ": positive and paired, the V column does not determine its critical set");
  if (target == d) return {tau, {tau}, {}};
  const auto& dec = red.homology(p, {true, false});
  auto ids = filt.by_dim(p);
  std::vector<SimplexId> members;
  auto col = dec.v.col(local);
  for (auto it = col.rbegin(); it != col.rend(); ++it) {
    const SimplexId id = ids[*it];
    const double v = filt.value(id);
    if (v < target) break;
    if (v <= d) members.push_back(id);
  }
  return detail::finish(filt, tau, std::move(members), target, false, with_closure);
}

/// Positive sigma (paired or not) moving up to target, read from the column
/// of sigma in the cohomology V.
inline CriticalSet critical_set_increase_birth(Reductions& red, SimplexId sigma, double target,
                                               bool with_closure = true) {
  const auto& filt = red.filtration();
  detail::check_target(target);
  const double b = filt.value(sigma);
  if (target < b) throw DirectionError("increase target below current value of " + detail::describe(filt, sigma));
  if (!red.is_positive(sigma))
    throw WrongSimplexClassError("increase birth needs a positive simplex; " + detail::describe(filt, sigma) +
                                 " is negative");
  if (target == b) return {sigma, {sigma}, {}};
  const int q = filt.dim(sigma);
  const auto n = static_cast<Index>(filt.count(q));
  const auto& dual = red.cohomology(q, {true, false});
  auto ids = filt.by_dim(q);
  std::vector<SimplexId> members;
  auto col = dual.v.col(n - 1 - filt.local_index(sigma));
  // dual rows run backwards through the filtration: walk from sigma upwards
  for (auto it = col.rbegin(); it != col.rend(); ++it) {
    const SimplexId id = ids[n - 1 - *it];
    const double v = filt.value(id);
    if (v > target) break;
    if (v >= b) members.push_back(id);
  }
  return detail::finish(filt, sigma, std::move(members), target, true, with_closure);
}

/// Positive sigma moving down to target. Paired sigma reads its row of the
/// cohomology U; unpaired sigma reads its homology V column.
inline CriticalSet critical_set_decrease_birth(Reductions& red, SimplexId sigma, double target,
                                               bool with_closure = true) {
  const auto& filt = red.filtration();
  detail::check_target(target);
  const double b = filt.value(sigma);
  if (target > b) throw DirectionError("decrease target above current value of " + detail::describe(filt, sigma));
  if (!red.is_positive(sigma))
    throw WrongSimplexClassError("decrease birth needs a positive simplex; " + detail::describe(filt, sigma) +
                                 " is negative");
  if (red.partner(sigma) == kInfinite) return critical_set_decrease_death(red, sigma, target, with_closure);
  if (target == b) return {sigma, {sigma}, {}};
  const int q = filt.dim(sigma);
  const auto n = static_cast<Index>(filt.count(q));
  const auto& dual = red.cohomology(q, {false, true});
  auto ids = filt.by_dim(q);
  std::vector<SimplexId> members;
  for (auto c : dual.u_row(n - 1 - filt.local_index(sigma))) {
    const SimplexId id = ids[n - 1 - c];
    const double v = filt.value(id);
    if (v < target) break;
    if (v <= b) members.push_back(id);
  }
  return detail::finish(filt, sigma, std::move(members), target, false, with_closure);
}

/// Picks the row or column for a request.
inline CriticalSet critical_set(Reductions& red, const MoveRequest& req, bool with_closure = true) {
  const auto& filt = red.filtration();
  const SimplexId mover = req.mover();
  if (mover == kInfinite) throw Error("cannot move the death of an infinite pair");
  const double now = filt.value(mover);
  if (req.endpoint == Endpoint::Death) {
    if (req.target >= now) return critical_set_increase_death(red, mover, req.target, with_closure);
    return critical_set_decrease_death(red, mover, req.target, with_closure);
  }
  if (req.target >= now) return critical_set_increase_birth(red, mover, req.target, with_closure);
  return critical_set_decrease_birth(red, mover, req.target, with_closure);
}

/// Appends each request's target to every simplex of its critical set.
inline TargetAssignment accumulate_targets(std::span<const MoveRequest> requests, Reductions& red,
                                           bool with_closure = true) {
  const auto& filt = red.filtration();
  TargetAssignment out;
  for (const auto& req : requests) {
    CriticalSet cs;
    try {
      cs = critical_set(red, req, with_closure);
    } catch (const WrongSimplexClassError& e) {
      throw WrongSimplexClassError(std::string(e.what()) + " [request: dim " + std::to_string(req.pair.dim) +
                                   " pair (" + format_value(req.pair.birth) + ", " +
                                   format_value(req.pair.death) + ") " +
                                   (req.endpoint == Endpoint::Birth ? "birth" : "death") + " -> " +
                                   format_value(req.target) + "]");
    }
    for (auto s : cs.members) out.targets[s].push_back(req.target);
    for (auto s : cs.closure) out.targets[s].push_back(req.target);
  }
  if (filt.has_argmax())
    for (const auto& [s, _] : out.targets) out.argmax_vertex.emplace(s, filt.argmax_vertex(s));
  return out;
}

// ---------------------------------------------------------------------------
// Conflict strategies

/// Farthest target from the current value; equal distances prefer the larger target.
inline SimplexValues resolve_max(const TargetAssignment& assign, const Filtration& filt) {
  SimplexValues out;
  for (const auto& [s, list] : assign.targets) {
    if (list.empty()) continue;
    const double a = filt.value(s);
    double best = list.front();
    for (double t : list) {
      const double dt = std::abs(a - t), db = std::abs(a - best);
      if (dt > db || (dt == db && t > best)) best = t;
    }
    out[s] = best;
  }
  return out;
}

inline SimplexValues resolve_avg(const TargetAssignment& assign, const Filtration&) {
  SimplexValues out;
  for (const auto& [s, list] : assign.targets) {
    if (list.empty()) continue;
    double sum = 0;
    for (double t : list) sum += t;
    out[s] = sum / static_cast<double>(list.size());
  }
  return out;
}

/// Movers of requests take their own target; everything else averages.
inline SimplexValues resolve_fca(const TargetAssignment& assign, std::span<const MoveRequest> requests,
                                 const Filtration& filt) {
  std::unordered_map<SimplexId, double> fixed;
  for (const auto& req : requests)
    if (!fixed.emplace(req.mover(), req.target).second)
      throw AmbiguityError(detail::describe(filt, req.mover()) + " is the mover of two requests");
  SimplexValues out = resolve_avg(assign, filt);
  for (auto& [s, v] : out)
    if (auto it = fixed.find(s); it != fixed.end()) v = it->second;
  return out;
}

/// dL/df = 2 (f - f') on every resolved simplex.
inline SimplexValues gradient_from_targets(const SimplexValues& resolved, const Filtration& filt) {
  SimplexValues grad;
  grad.reserve(resolved.size());
  for (const auto& [s, target] : resolved) grad[s] = 2.0 * (filt.value(s) - target);
  return grad;
}

/// Sends each simplex gradient to the simplex's argmax vertex. A vertex hit
/// by several simplices keeps the largest displacement; ties go to the
/// smaller simplex id.
inline VertexValues backprop_lower_star(const SimplexValues& grad, const Filtration& filt) {
  if (!grad.empty() && !filt.has_argmax()) throw Error("backpropagation needs a lower-star filtration");
  std::unordered_map<VertexId, std::pair<double, SimplexId>> best;
  for (const auto& [s, g] : grad) {
    const VertexId v = filt.argmax_vertex(s);
    auto [it, fresh] = best.emplace(v, std::pair{g, s});
    if (fresh) continue;
    auto& [bg, bs] = it->second;
    if (std::abs(g) > std::abs(bg) || (std::abs(g) == std::abs(bg) && s < bs)) it->second = {g, s};
  }
  VertexValues out;
  out.reserve(best.size());
  for (const auto& [v, gs] : best) out[v] = gs.first;
  return out;
}

/// Simplex-level gradient of the baseline: only the two simplices defining
/// each matched pair receive a gradient.
inline SimplexValues diagram_simplex_gradient(std::span<const MoveRequest> requests, const Filtration& filt) {
  SimplexValues grad;
  for (const auto& req : requests) {
    const SimplexId s = req.mover();
    const double g = 2.0 * (filt.value(s) - req.target);
    auto [it, fresh] = grad.emplace(s, g);
    if (!fresh && std::abs(g) > std::abs(it->second)) it->second = g;
  }
  return grad;
}

inline VertexValues diagram_method_gradient(std::span<const MoveRequest> requests, const Filtration& filt) {
  return backprop_lower_star(diagram_simplex_gradient(requests, filt), filt);
}

enum class Strategy { Max, Avg, Fca };

inline SimplexValues resolve(Strategy strategy, const TargetAssignment& assign,
                             std::span<const MoveRequest> requests, const Filtration& filt) {
  switch (strategy) {
    case Strategy::Max: return resolve_max(assign, filt);
    case Strategy::Avg: return resolve_avg(assign, filt);
    case Strategy::Fca: return resolve_fca(assign, requests, filt);
  }
  return {};
}

/// Full critical-set pipeline down to simplex gradients.
inline SimplexValues critical_simplex_gradient(std::span<const MoveRequest> requests, Reductions& red,
                                               Strategy strategy, bool with_closure = true) {
  const auto assign = accumulate_targets(requests, red, with_closure);
  return gradient_from_targets(resolve(strategy, assign, requests, red.filtration()), red.filtration());
}

}  // namespace critset
