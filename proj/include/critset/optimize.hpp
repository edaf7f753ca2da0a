#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "critset/bigstep.hpp"
#include "critset/complex.hpp"
#include "critset/losses.hpp"
#include "critset/reduction.hpp"

namespace critset {

enum class Method { Critical, Diagram };
enum class OptimizerKind { Sgd, RmsProp, Adam };

struct OptimizerConfig {
  Method method = Method::Critical;
  Strategy strategy = Strategy::Max;
  OptimizerKind optimizer = OptimizerKind::Sgd;
  double learning_rate = 0.2;
  double momentum = 0;  // gamma, SGD only
  double beta1 = 0.9;
  double beta2 = 0.99;
  double epsilon = 1e-8;
  std::size_t steps = 50;
  LossSpec loss;
  bool closure = true;
  bool record_vineyard = false;

  void validate() const {
    if (!(learning_rate > 0)) throw Error("learning rate must be positive");
    if (steps < 1) throw Error("steps must be at least 1");
    if (momentum < 0 || momentum >= 1) throw Error("momentum must lie in [0, 1)");
    if (beta1 <= 0 || beta1 >= 1 || beta2 <= 0 || beta2 >= 1) throw Error("betas must lie in (0, 1)");
  }
};

struct OptimizerState {
  std::vector<double> x;         // per-vertex values
  std::vector<double> velocity;  // momentum buffer
  std::vector<double> m, v;      // first and second moments
  std::size_t t = 0;             // completed steps

  explicit OptimizerState(std::vector<double> values = {})
      : x(std::move(values)), velocity(x.size(), 0), m(x.size(), 0), v(x.size(), 0) {}
};

/// One parameter update. Vertices missing from grad see a zero gradient.
inline void step(OptimizerState& s, const VertexValues& grad, const OptimizerConfig& cfg) {
  const std::size_t n = s.x.size();
  std::vector<double> g(n, 0.0);
  for (const auto& [vtx, val] : grad) {
    if (vtx < 0 || static_cast<std::size_t>(vtx) >= n)
      throw Error("gradient for unknown vertex " + std::to_string(vtx));
    if (!std::isfinite(val))
      throw NumericalError(s.t, "non-finite gradient at vertex " + std::to_string(vtx));
    g[vtx] = val;
  }
  ++s.t;
  const double lr = cfg.learning_rate;
  switch (cfg.optimizer) {
    case OptimizerKind::Sgd:
      if (cfg.momentum == 0) {
        for (std::size_t i = 0; i < n; ++i) s.x[i] -= lr * g[i];
      } else {
        for (std::size_t i = 0; i < n; ++i) {
          s.velocity[i] = cfg.momentum * s.velocity[i] + g[i];
          s.x[i] -= lr * s.velocity[i];
        }
      }
      break;
    case OptimizerKind::RmsProp:
      for (std::size_t i = 0; i < n; ++i) {
        s.v[i] = cfg.beta2 * s.v[i] + (1 - cfg.beta2) * g[i] * g[i];
        s.x[i] -= lr * g[i] / (std::sqrt(s.v[i]) + cfg.epsilon);
      }
      break;
    case OptimizerKind::Adam: {
      const double c1 = 1 - std::pow(cfg.beta1, static_cast<double>(s.t));
      const double c2 = 1 - std::pow(cfg.beta2, static_cast<double>(s.t));
      for (std::size_t i = 0; i < n; ++i) {
        s.m[i] = cfg.beta1 * s.m[i] + (1 - cfg.beta1) * g[i];
        s.v[i] = cfg.beta2 * s.v[i] + (1 - cfg.beta2) * g[i] * g[i];
        s.x[i] -= lr * (s.m[i] / c1) / (std::sqrt(s.v[i] / c2) + cfg.epsilon);
      }
      break;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(s.x[i])) throw NumericalError(s.t - 1, "parameter diverged at vertex " + std::to_string(i));
}

struct VineyardRecord {
  std::size_t step;
  std::int32_t pair_id;  // complex index of the birth simplex
  int dim;
  double birth, death;
};

struct RunLog {
  double initial_loss = 0;
  std::vector<double> losses;   // losses[t] is the loss after t + 1 updates
  std::vector<double> wall_ms;  // per step
  std::vector<VineyardRecord> vineyard;
  std::vector<double> final_values;
  std::size_t mover_mismatches = 0;  // fca only: mover gradients differing from the diagram gradient
};

/// Diagram restricted to the loss dimensions.
inline std::vector<PersistencePair> loss_diagram(Reductions& red, const LossSpec& spec, ReduceOptions opts = {false, false}) {
  std::vector<PersistencePair> out;
  for (int p : spec.dims) {
    if (p < 0 || p > red.filtration().max_dim()) continue;
    if (p < red.filtration().max_dim()) red.homology(p + 1, opts);
    auto d = red.pairs(p);
    out.insert(out.end(), d.begin(), d.end());
  }
  return out;
}

struct RunOptions {
  std::optional<double> stop_below;  // stop once the loss drops under this
};

namespace detail {

struct Evaluation {
  double loss;
  VertexValues grad;
  std::size_t mover_mismatches = 0;
};

inline Evaluation evaluate(const Filtration& filt, const OptimizerConfig& cfg, std::size_t t, RunLog* log) {
  Reductions red(filt);
  const bool critical = cfg.method == Method::Critical;
  const auto diagram = loss_diagram(red, cfg.loss, {critical, false});
  if (log && cfg.record_vineyard)
    for (const auto& p : diagram)
      if (p.finite() && p.death > p.birth)
        log->vineyard.push_back({t, static_cast<std::int32_t>(filt.input_index(p.birth_simplex)), p.dim, p.birth, p.death});

  const auto matching = cfg.loss.match(diagram);
  Evaluation ev{diagram_loss(diagram, matching), {}};
  const auto requests = move_requests(matching);
  if (critical) {
    const auto grad = critical_simplex_gradient(requests, red, cfg.strategy, cfg.closure);
    if (cfg.strategy == Strategy::Fca) {
      const auto base = diagram_simplex_gradient(requests, filt);
      for (const auto& [s, g] : base) {
        auto it = grad.find(s);
        const double ours = it == grad.end() ? 0.0 : it->second;
        if (ours != g) ++ev.mover_mismatches;
      }
    }
    ev.grad = backprop_lower_star(grad, filt);
  } else {
    ev.grad = diagram_method_gradient(requests, filt);
  }
  return ev;
}

}  // namespace detail

/// Optimizes vertex values of a fixed complex under the lower-star
/// filtration. Every step rebuilds the filtration, the diagram and the
/// matching from scratch.
inline RunLog run(std::shared_ptr<const Complex> complex, std::vector<double> values, const OptimizerConfig& cfg,
                  const RunOptions& ropt = {}) {
  cfg.validate();
  using clock = std::chrono::steady_clock;
  RunLog log;
  OptimizerState state(std::move(values));

  auto ev = detail::evaluate(lower_star(complex, state.x), cfg, 0, &log);
  log.initial_loss = ev.loss;
  log.mover_mismatches += ev.mover_mismatches;
  if (!(ropt.stop_below && ev.loss < *ropt.stop_below)) {
    for (std::size_t t = 1; t <= cfg.steps; ++t) {
      const auto start = clock::now();
      step(state, ev.grad, cfg);
      ev = detail::evaluate(lower_star(complex, state.x), cfg, t, &log);
      log.losses.push_back(ev.loss);
      log.mover_mismatches += ev.mover_mismatches;
      log.wall_ms.push_back(std::chrono::duration<double, std::milli>(clock::now() - start).count());
      if (ropt.stop_below && ev.loss < *ropt.stop_below) break;
    }
  }
  log.final_values = std::move(state.x);
  return log;
}

inline RunLog run(const GridField& field, const OptimizerConfig& cfg, const RunOptions& ropt = {}) {
  if (field.values.size() != field.size()) throw InvalidFieldError("field size does not match its shape");
  return run(freudenthal_complex(field.shape), field.values, cfg, ropt);
}

inline RunLog run(std::span<const double> signal, const OptimizerConfig& cfg, const RunOptions& ropt = {}) {
  if (signal.empty()) throw EmptyInputError("empty signal");
  return run(path_complex(signal.size()), {signal.begin(), signal.end()}, cfg, ropt);
}

/// Number of updates until the loss first drops below threshold: 0 when the
/// initial loss already does, nullopt when cfg.steps updates do not suffice.
inline std::optional<std::size_t> steps_to_threshold(const RunLog& log, double threshold) {
  if (log.initial_loss < threshold) return 0;
  for (std::size_t t = 0; t < log.losses.size(); ++t)
    if (log.losses[t] < threshold) return t + 1;
  return std::nullopt;
}

struct Comparison {
  std::optional<std::size_t> steps_a, steps_b;
  RunLog log_a, log_b;
};

inline Comparison compare(const GridField& field, const OptimizerConfig& a, const OptimizerConfig& b,
                          double threshold) {
  Comparison c;
  c.log_a = run(field, a, {threshold});
  c.log_b = run(field, b, {threshold});
  c.steps_a = steps_to_threshold(c.log_a, threshold);
  c.steps_b = steps_to_threshold(c.log_b, threshold);
  return c;
}

// ---------------------------------------------------------------------------
// Synthetic benchmark field

struct GaussianFieldOptions {
  std::size_t n_gaussians = 5;
  double noise = 0.05;  // uniform noise amplitude relative to the value range
};

/// Sum of isotropic Gaussian bumps at random centers plus uniform noise,
/// on the unit cube sampled at the grid vertices.
inline GridField gaussian_field(std::array<std::size_t, 3> shape, std::uint64_t seed,
                                const GaussianFieldOptions& opt = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  struct Bump {
    double cx, cy, cz, width, amp;
  };
  std::vector<Bump> bumps;
  for (std::size_t k = 0; k < opt.n_gaussians; ++k) {
    Bump b{};
    b.cx = unit(rng);
    b.cy = unit(rng);
    b.cz = unit(rng);
    b.width = 0.1 + 0.15 * unit(rng);
    b.amp = (unit(rng) < 0.5 ? -1.0 : 1.0) * (0.5 + unit(rng));
    bumps.push_back(b);
  }
  GridField f{shape, std::vector<double>(shape[0] * shape[1] * shape[2])};
  auto coord = [](std::size_t i, std::size_t n) { return n > 1 ? static_cast<double>(i) / (n - 1) : 0.5; };
  for (std::size_t z = 0; z < shape[2]; ++z)
    for (std::size_t y = 0; y < shape[1]; ++y)
      for (std::size_t x = 0; x < shape[0]; ++x) {
        double v = 0;
        for (const auto& b : bumps) {
          const double dx = coord(x, shape[0]) - b.cx, dy = coord(y, shape[1]) - b.cy,
                       dz = coord(z, shape[2]) - b.cz;
          v += b.amp * std::exp(-(dx * dx + dy * dy + dz * dz) / (2 * b.width * b.width));
        }
        f.values[f.index(x, y, z)] = v;
      }
  const auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
  const double range = *hi - *lo;
  for (auto& v : f.values) v += opt.noise * range * (2 * unit(rng) - 1);
  return f;
}

}  // namespace critset
