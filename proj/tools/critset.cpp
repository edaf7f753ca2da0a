#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "critset/critset.hpp"

namespace fs = std::filesystem;
using namespace critset;

namespace {

constexpr int kOk = 0, kMismatch = 1, kUsage = 2, kNumerical = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, sep);) out.push_back(item);
  return out;
}

std::array<std::size_t, 3> parse_shape(const std::string& s) {
  auto parts = split(s, ',');
  if (parts.empty() || parts.size() > 3) throw UsageError("--shape expects X,Y,Z");
  std::array<std::size_t, 3> shape{1, 1, 1};
  for (std::size_t i = 0; i < parts.size(); ++i) {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(parts[i], &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != parts[i].size() || v < 1) throw UsageError("bad --shape component '" + parts[i] + "'");
    shape[i] = static_cast<std::size_t>(v);
  }
  return shape;
}

std::vector<int> parse_dims(const std::string& s) {
  std::vector<int> dims;
  for (const auto& p : split(s, ',')) {
    try {
      dims.push_back(std::stoi(p));
    } catch (const std::exception&) {
      throw UsageError("bad --dims entry '" + p + "'");
    }
  }
  return dims;
}

double parse_real(const std::string& s, const char* flag) {
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw UsageError(std::string("bad value for ") + flag + ": '" + s + "'");
}

void write_atomically(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

// Input is a raw float32 grid when a shape is given, a text signal otherwise.
struct Input {
  std::shared_ptr<const Complex> complex;
  std::vector<double> values;
  std::optional<std::array<std::size_t, 3>> shape;
};

Input load_input(const std::string& path, const std::string& shape_flag, const std::string& synthetic,
                 std::uint64_t seed) {
  Input in;
  if (!synthetic.empty()) {
    if (!path.empty()) throw UsageError("give either an input file or --synthetic, not both");
    in.shape = parse_shape(synthetic);
    auto field = gaussian_field(*in.shape, seed);
    in.values = std::move(field.values);
    in.complex = freudenthal_complex(*in.shape);
    return in;
  }
  if (path.empty()) throw UsageError("an input file is required");
  if (!shape_flag.empty()) {
    in.shape = parse_shape(shape_flag);
    const auto expected = (*in.shape)[0] * (*in.shape)[1] * (*in.shape)[2] * sizeof(float);
    std::error_code ec;
    const auto size = fs::file_size(path, ec);
    if (ec) throw UsageError("cannot read " + path);
    if (size != expected)
      throw UsageError(path + " holds " + std::to_string(size) + " bytes; shape needs " + std::to_string(expected));
    auto field = read_raw_f32(path, *in.shape);
    in.values = std::move(field.values);
    in.complex = freudenthal_complex(*in.shape);
  } else {
    in.values = read_text_signal(path);
    if (in.values.empty()) throw UsageError(path + " holds no values");
    in.complex = path_complex(in.values.size());
  }
  return in;
}

int cmd_persistence(const std::string& input, const std::string& shape, const std::string& synthetic,
                    std::uint64_t seed, const std::string& dims_flag, const std::string& output) {
  auto in = load_input(input, shape, synthetic, seed);
  auto filt = lower_star(in.complex, in.values);
  auto pairs = read_pairs(filt);
  if (!dims_flag.empty()) {
    auto dims = parse_dims(dims_flag);
    std::erase_if(pairs, [&](const PersistencePair& p) {
      return std::find(dims.begin(), dims.end(), p.dim) == dims.end();
    });
  }
  std::ostringstream csv;
  write_diagram_csv(csv, pairs);
  if (output.empty() || output == "-") {
    std::cout << csv.str();
  } else {
    write_atomically(output, csv.str());
  }
  return kOk;
}

struct OptimizeFlags {
  std::string input, shape, synthetic, out_dir;
  std::string loss, eps = "inf", threshold, mode = "midpoint", method = "critical", strategy = "max",
                    optimizer = "sgd", dims = "0";
  double lr = 0.2, momentum = 0;
  std::size_t steps = 50;
  std::uint64_t seed = 0;
  bool no_closure = false;
};

int cmd_optimize(const OptimizeFlags& f) {
  OptimizerConfig cfg;
  cfg.learning_rate = f.lr;
  cfg.momentum = f.momentum;
  cfg.steps = f.steps;
  cfg.closure = !f.no_closure;
  cfg.record_vineyard = true;
  cfg.method = f.method == "critical" ? Method::Critical : Method::Diagram;
  cfg.strategy = f.strategy == "max" ? Strategy::Max : f.strategy == "avg" ? Strategy::Avg : Strategy::Fca;
  cfg.optimizer = f.optimizer == "sgd"       ? OptimizerKind::Sgd
                  : f.optimizer == "rmsprop" ? OptimizerKind::RmsProp
                                             : OptimizerKind::Adam;
  cfg.loss.dims = parse_dims(f.dims);
  if (f.loss == "simplify") {
    cfg.loss.kind = LossKind::Simplify;
    cfg.loss.eps = parse_real(f.eps, "--eps");
    if (!(cfg.loss.eps > 0)) throw UsageError("--eps must be positive");
    cfg.loss.mode = f.mode == "midpoint"   ? SimplifyMode::Midpoint
                    : f.mode == "birth-up" ? SimplifyMode::BirthUp
                                           : SimplifyMode::DeathDown;
  } else {
    cfg.loss.kind = LossKind::Quadrant;
    if (f.threshold.empty()) throw UsageError("--loss quadrant needs --threshold");
    cfg.loss.threshold = parse_real(f.threshold, "--threshold");
    if (!std::isfinite(cfg.loss.threshold)) throw UsageError("--threshold must be finite");
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  auto in = load_input(f.input, f.shape, f.synthetic, f.seed);
  auto log = run(in.complex, in.values, cfg);

  fs::create_directories(f.out_dir);
  const fs::path dir(f.out_dir);

  std::ostringstream loss;
  loss << "step,loss,wall_ms\n";
  loss << 0 << ',' << format_value(log.initial_loss) << ',' << 0 << '\n';
  for (std::size_t t = 0; t < log.losses.size(); ++t)
    loss << t + 1 << ',' << format_value(log.losses[t]) << ',' << format_value(log.wall_ms[t]) << '\n';
  write_atomically(dir / "loss.csv", loss.str());

  std::ostringstream vin;
  vin << "step,pair_id,dim,birth,death\n";
  for (const auto& r : log.vineyard)
    vin << r.step << ',' << r.pair_id << ',' << r.dim << ',' << format_value(r.birth) << ','
        << format_value(r.death) << '\n';
  write_atomically(dir / "vineyard.csv", vin.str());

  if (in.shape) {
    const fs::path tmp = dir / "final.raw.tmp";
    write_raw_f32(tmp.string(), log.final_values);
    fs::rename(tmp, dir / "final.raw");
  } else {
    std::ostringstream txt;
    for (double v : log.final_values) txt << format_value(v) << '\n';
    write_atomically(dir / "final.txt", txt.str());
  }
  std::cout << "initial loss " << format_value(log.initial_loss) << ", final loss "
            << format_value(log.losses.empty() ? log.initial_loss : log.losses.back()) << " after "
            << log.losses.size() << " steps\n";
  return kOk;
}

nlohmann::json reproducer(const Filtration& filt, const MoveRequest& req, const CriticalSet& ours,
                          const CriticalSet& reference, std::uint64_t seed) {
  nlohmann::json j;
  j["seed"] = seed;
  auto& simplices = j["simplices"] = nlohmann::json::array();
  auto& values = j["values"] = nlohmann::json::array();
  for (SimplexId s = 0; s < static_cast<SimplexId>(filt.size()); ++s) {
    auto vs = filt.simplex(s).vertices;
    simplices.push_back(std::vector<VertexId>(vs.begin(), vs.end()));
    values.push_back(filt.value(s));
  }
  j["request"] = {{"birth_simplex", req.pair.birth_simplex},
                  {"death_simplex", req.pair.death_simplex},
                  {"endpoint", req.endpoint == Endpoint::Birth ? "birth" : "death"},
                  {"target", req.target}};
  j["critical_set"] = ours.members;
  j["oracle_set"] = reference.members;
  j["critical_closure"] = ours.closure;
  j["oracle_closure"] = reference.closure;
  return j;
}

int cmd_verify(std::size_t cases, std::uint64_t seed, std::size_t max_simplices, const std::string& out) {
  if (max_simplices < 1) throw UsageError("--max-simplices must be positive");
  std::size_t checked = 0;
  for (std::size_t c = 0; c < cases; ++c) {
    const std::uint64_t case_seed = seed + c;
    std::mt19937_64 rng(case_seed);
    oracle::RandomFiltrationOptions opt;
    opt.n_vertices = 3 + rng() % 8;
    opt.max_dim = 1 + static_cast<int>(rng() % 3);
    opt.max_simplices = max_simplices;
    auto filt = oracle::random_filtration(case_seed, opt);
    Reductions red(filt);
    const double lo = filt.values().front() - 0.5, hi = filt.values().back() + 0.5;
    for (int p = 0; p <= filt.max_dim(); ++p)
      for (const auto& pair : red.pairs(p))
        for (auto endpoint : {Endpoint::Birth, Endpoint::Death})
          for (bool up : {true, false}) {
            MoveRequest req{pair, endpoint, 0};
            if (req.mover() == kInfinite) continue;
            const double now = filt.value(req.mover());
            req.target = std::uniform_real_distribution<double>(up ? now : lo, up ? hi : now)(rng);
            CriticalSet ours;
            try {
              ours = critical_set(red, req);
            } catch (const WrongSimplexClassError&) {
              continue;  // outside the covered cases
            }
            const auto reference = oracle::oracle_move(filt, req);
            ++checked;
            if (ours.members != reference.members || ours.closure != reference.closure) {
              write_atomically(out, reproducer(filt, req, ours, reference, case_seed).dump(2) + "\n");
              std::cerr << "mismatch in case " << c << " (seed " << case_seed << "); reproducer written to " << out
                        << "\n";
              return kMismatch;
            }
          }
  }
  std::cout << "verified " << checked << " requests over " << cases << " filtrations\n";
  return kOk;
}

int cmd_synth(const std::string& shape, std::uint64_t seed, const std::string& output) {
  auto field = gaussian_field(parse_shape(shape), seed);
  write_raw_f32(output, field.values);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Critical-set persistence optimization"};
  app.require_subcommand(1);

  std::string input, shape, synthetic, dims, output;
  std::uint64_t seed = 0;
  auto* persistence = app.add_subcommand("persistence", "Write the persistence diagram as CSV");
  persistence->add_option("input", input, "Raw float32 grid (with --shape) or text signal");
  persistence->add_option("--shape", shape, "Grid shape X,Y,Z for raw input");
  persistence->add_option("--synthetic", synthetic, "Use the Gaussian benchmark field of this shape");
  persistence->add_option("--seed", seed, "Seed for --synthetic");
  persistence->add_option("--dims", dims, "Comma-separated dimensions to keep");
  persistence->add_option("-o,--output", output, "Output CSV (default stdout)");

  OptimizeFlags of;
  auto* optimize = app.add_subcommand("optimize", "Run gradient descent on a topological loss");
  optimize->add_option("input", of.input, "Raw float32 grid (with --shape) or text signal");
  optimize->add_option("--shape", of.shape, "Grid shape X,Y,Z for raw input");
  optimize->add_option("--synthetic", of.synthetic, "Use the Gaussian benchmark field of this shape");
  optimize->add_option("--loss", of.loss, "Loss")->required()->check(CLI::IsMember({"simplify", "quadrant"}));
  optimize->add_option("--eps", of.eps, "Simplification threshold (inf allowed)");
  optimize->add_option("--threshold", of.threshold, "Quadrant corner a");
  optimize->add_option("--mode", of.mode, "Simplification target")
      ->check(CLI::IsMember({"midpoint", "birth-up", "death-down"}));
  optimize->add_option("--method", of.method, "Gradient method")->check(CLI::IsMember({"critical", "diagram"}));
  optimize->add_option("--strategy", of.strategy, "Conflict strategy")->check(CLI::IsMember({"max", "avg", "fca"}));
  optimize->add_option("--optimizer", of.optimizer, "Update rule")
      ->check(CLI::IsMember({"sgd", "rmsprop", "adam"}));
  optimize->add_option("--lr", of.lr, "Learning rate");
  optimize->add_option("--momentum", of.momentum, "Momentum (sgd)");
  optimize->add_option("--steps", of.steps, "Number of steps");
  optimize->add_option("--dims", of.dims, "Diagram dimensions seen by the loss");
  optimize->add_option("--seed", of.seed, "Seed for --synthetic");
  optimize->add_flag("--no-closure", of.no_closure, "Skip the face/coface pass");
  optimize->add_option("--out-dir", of.out_dir, "Output directory")->required();

  std::size_t cases = 100, max_simplices = 40;
  std::uint64_t vseed = 0;
  std::string reproducer_path = "verify_reproducer.json";
  auto* verify = app.add_subcommand("verify", "Compare critical sets against the transposition oracle");
  verify->add_option("--cases", cases, "Random filtrations to check");
  verify->add_option("--seed", vseed, "First seed");
  verify->add_option("--max-simplices", max_simplices, "Size cap per filtration");
  verify->add_option("--reproducer", reproducer_path, "Where to write a failing case");

  std::string sshape = "16,16,16", soutput;
  std::uint64_t sseed = 42;
  auto* synth = app.add_subcommand("synth", "Write the Gaussian benchmark field as raw float32");
  synth->add_option("--shape", sshape, "Grid shape X,Y,Z");
  synth->add_option("--seed", sseed, "Seed");
  synth->add_option("-o,--output", soutput, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*persistence) return cmd_persistence(input, shape, synthetic, seed, dims, output);
    if (*optimize) return cmd_optimize(of);
    if (*verify) return cmd_verify(cases, vseed, max_simplices, reproducer_path);
    if (*synth) return cmd_synth(sshape, sseed, soutput);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kOk;
}
