// Experiment configuration, the convergence and SNR-sweep runners, and their CSV / JSON output.
#pragma once

#include "relayprec/baselines.hpp"
#include "relayprec/channel.hpp"
#include "relayprec/constellation.hpp"
#include "relayprec/io.hpp"
#include "relayprec/two_step.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace relayprec {

inline constexpr const char* kTwoStep = "two-step";
inline constexpr const char* kGradient = "gradient";
inline constexpr const char* kNoPrecoding = "no-precoding";
inline constexpr const char* kWaterfilling = "gaussian-waterfilling";

struct ExperimentConfig {
  cdouble h0{0.4, 0.0};
  std::vector<RelayLink> relays{{cdouble(1.2, 0.0), cdouble(0.0, -0.9)}};
  std::string relay_selection = "capacity";  // "capacity" or a relay index
  std::string constellation = "bpsk";
  int block_length = 1;
  double snr_db = 3.0;
  std::vector<double> snr_grid{3.0};
  std::uint64_t seed = 1;
  std::size_t samples = kDefaultReportSamples;  // reported estimates
  OptimizerConfig optimizer;
  std::vector<std::string> baselines{kTwoStep, kGradient};
  unsigned workers = 1;

  RelayNetworkParams network(double snr) const {
    return RelayNetworkParams::at_snr(h0, relays, snr, block_length);
  }

  void validate() const {
    if (relays.empty()) throw std::invalid_argument("config: at least one relay is required");
    if (block_length < 1) throw std::invalid_argument("config: block_length must be >= 1");
    if (snr_grid.empty()) throw std::invalid_argument("config: snr_grid must not be empty");
    if (!std::is_sorted(snr_grid.begin(), snr_grid.end())) throw std::invalid_argument("config: snr_grid must be sorted");
    if (samples < 1) throw std::invalid_argument("config: samples must be >= 1");
    if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
    static const std::set<std::string> known{kTwoStep, kGradient, kNoPrecoding, kWaterfilling};
    for (const auto& b : baselines)
      if (!known.count(b)) throw std::invalid_argument("config: unknown method '" + b + "' in baselines");
    if (relay_selection != "capacity") {
      std::size_t idx = 0;
      const auto [p, ec] = std::from_chars(relay_selection.data(), relay_selection.data() + relay_selection.size(), idx);
      if (ec != std::errc() || p != relay_selection.data() + relay_selection.size() || idx >= relays.size())
        throw std::invalid_argument("config: relay_selection must be 'capacity' or a valid relay index");
    }
    parse_constellation(constellation);
    optimizer.validate();
  }
};

/// Single-relay channel h0 = 0.4, h1 = 1.2, g1 = −0.9j, BPSK, L = 1, 3 dB.
/// The presets start the rotation from a seeded random unitary: with U = V_H and V = I the
/// channel splits into independent eigenmodes, E is diagonal and the rotation gradient vanishes.
inline ExperimentConfig convergence_preset() {
  ExperimentConfig c;
  c.optimizer.random_rotation_start = true;
  return c;
}

/// Same channel, QPSK, SNR grid −10..20 dB in 1 dB steps, N = 2·10⁴ per reported point.
inline ExperimentConfig sweep_preset() {
  ExperimentConfig c = convergence_preset();
  c.constellation = "qpsk";
  c.snr_grid.clear();
  for (int s = -10; s <= 20; ++s) c.snr_grid.push_back(s);
  c.samples = 20000;
  c.optimizer.report_samples = 20000;
  c.optimizer.trace_samples = 2000;
  c.baselines = {kTwoStep, kNoPrecoding, kWaterfilling};
  return c;
}

namespace detail {

inline std::vector<double> parse_grid(const std::string& v) {
  std::vector<double> out;
  if (v.find(':') != std::string::npos) {
    const auto parts = split(v, ':');
    double a = 0, b = 0, s = 0;
    if (parts.size() != 3 || !parse_double(parts[0], a) || !parse_double(parts[1], b) || !parse_double(parts[2], s) ||
        !(s > 0) || b < a)
      throw std::invalid_argument("expected start:stop:step with step > 0");
    const auto n = static_cast<long>(std::floor((b - a) / s + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(a + s * static_cast<double>(i));
    return out;
  }
  for (const auto& p : split(v, ',')) {
    double x = 0;
    if (!parse_double(p, x)) throw std::invalid_argument("'" + p + "' is not a number");
    out.push_back(x);
  }
  return out;
}

template <class T>
T parse_integer(const std::string& v) {
  T x{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) throw std::invalid_argument("'" + v + "' is not an integer");
  return x;
}

inline double parse_real(const std::string& v) {
  double x = 0;
  if (!parse_double(v, x)) throw std::invalid_argument("'" + v + "' is not a number");
  return x;
}

inline bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("'" + v + "' is not a boolean");
}

}  // namespace detail

/// Applies one `key = value` setting. Throws std::invalid_argument naming the key.
inline void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  using namespace detail;
  try {
    auto& o = c.optimizer;
    if (key == "h0") c.h0 = parse_complex(value);
    else if (key == "relay") {
      const auto parts = split(value, ',');
      if (parts.size() != 2) throw std::invalid_argument("expected 'h, g'");
      c.relays.push_back({parse_complex(parts[0]), parse_complex(parts[1])});
    } else if (key == "relays") {
      c.relays.clear();
      if (value != "none") throw std::invalid_argument("only 'none' is accepted; list relays with 'relay = h, g'");
    } else if (key == "relay_selection") c.relay_selection = value;
    else if (key == "constellation") c.constellation = value;
    else if (key == "block_length") c.block_length = parse_integer<int>(value);
    else if (key == "snr_db") { c.snr_db = parse_real(value); c.snr_grid = {c.snr_db}; }
    else if (key == "snr_grid") c.snr_grid = parse_grid(value);
    else if (key == "seed") c.seed = parse_integer<std::uint64_t>(value);
    else if (key == "samples") { c.samples = parse_integer<std::size_t>(value); o.report_samples = c.samples; }
    else if (key == "opt_samples") o.opt_samples = parse_integer<std::size_t>(value);
    else if (key == "trace_samples") o.trace_samples = parse_integer<std::size_t>(value);
    else if (key == "barrier.t0") o.barrier.t0 = parse_real(value);
    else if (key == "barrier.alpha") o.barrier.alpha = parse_real(value);
    else if (key == "barrier.epsilon") o.barrier.epsilon = parse_real(value);
    else if (key == "barrier.max_inner") o.barrier.max_inner_iters = parse_integer<int>(value);
    else if (key == "barrier.grad_tol") o.barrier.grad_tol = parse_real(value);
    else if (key == "rotation.max_iters") o.rotation.max_iters = parse_integer<int>(value);
    else if (key == "rotation.grad_tol") o.rotation.grad_tol = parse_real(value);
    else if (key == "max_outer") o.max_outer = parse_integer<int>(value);
    else if (key == "tol_outer") o.tol_outer = parse_real(value);
    else if (key == "gradient.max_iters") o.max_gradient_iters = parse_integer<int>(value);
    else if (key == "gradient.tol") o.gradient_tol = parse_real(value);
    else if (key == "random_rotation_start") o.random_rotation_start = parse_bool(value);
    else if (key == "baselines") c.baselines = split(value, ',');
    else if (key == "workers") c.workers = parse_integer<unsigned>(value);
    else throw std::invalid_argument("unknown key");
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("config key '" + key + "': " + e.what());
  }
}

/// Reads `key = value` lines over `base`; '#' starts a comment. A file that lists any
/// `relay = h, g` line replaces the base relays. Errors carry the line number.
inline ExperimentConfig parse_config(std::istream& is, ExperimentConfig base = {}) {
  std::string line;
  int lineno = 0;
  bool relays_reset = false;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw parse_error("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = detail::trim(body.substr(0, eq));
    const std::string value = detail::trim(body.substr(eq + 1));
    if (key == "relay" && !relays_reset) {
      base.relays.clear();
      relays_reset = true;
    }
    try {
      apply_setting(base, key, value);
    } catch (const std::invalid_argument& e) {
      throw parse_error("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config '" + path + "'");
  try {
    return parse_config(f, std::move(base));
  } catch (const parse_error& e) {
    throw parse_error(path + ": " + e.what());
  }
}

/// Canonical `key = value` listing of every field; its FNV-1a hash tags output rows.
inline std::string canonical_config(const ExperimentConfig& c) {
  std::ostringstream os;
  const auto& o = c.optimizer;
  os << "h0 = " << format_complex(c.h0) << '\n';
  for (const auto& r : c.relays) os << "relay = " << format_complex(r.h) << ", " << format_complex(r.g) << '\n';
  os << "relay_selection = " << c.relay_selection << '\n'
     << "constellation = " << c.constellation << '\n'
     << "block_length = " << c.block_length << '\n'
     << "snr_db = " << format_double(c.snr_db) << '\n'
     << "snr_grid = ";
  for (std::size_t i = 0; i < c.snr_grid.size(); ++i) os << (i ? "," : "") << format_double(c.snr_grid[i]);
  os << '\n'
     << "seed = " << c.seed << '\n'
     << "samples = " << c.samples << '\n'
     << "opt_samples = " << o.opt_samples << '\n'
     << "trace_samples = " << o.trace_samples << '\n'
     << "barrier.t0 = " << format_double(o.barrier.t0) << '\n'
     << "barrier.alpha = " << format_double(o.barrier.alpha) << '\n'
     << "barrier.epsilon = " << format_double(o.barrier.epsilon) << '\n'
     << "barrier.max_inner = " << o.barrier.max_inner_iters << '\n'
     << "barrier.grad_tol = " << format_double(o.barrier.grad_tol) << '\n'
     << "rotation.max_iters = " << o.rotation.max_iters << '\n'
     << "rotation.grad_tol = " << format_double(o.rotation.grad_tol) << '\n'
     << "max_outer = " << o.max_outer << '\n'
     << "tol_outer = " << format_double(o.tol_outer) << '\n'
     << "gradient.max_iters = " << o.max_gradient_iters << '\n'
     << "gradient.tol = " << format_double(o.gradient_tol) << '\n'
     << "random_rotation_start = " << (o.random_rotation_start ? "true" : "false") << '\n'
     << "baselines = ";
  for (std::size_t i = 0; i < c.baselines.size(); ++i) os << (i ? "," : "") << c.baselines[i];
  os << '\n';
  return os.str();
}

inline std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_config(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::size_t resolve_relay(const ExperimentConfig& c, const RelayNetworkParams& net) {
  if (c.relay_selection == "capacity") return select_relay(net);
  return detail::parse_integer<std::size_t>(c.relay_selection);
}

inline OptimizerConfig effective_optimizer(const ExperimentConfig& c) {
  OptimizerConfig o = c.optimizer;
  o.report_samples = c.samples;
  return o;
}

// ---------------------------------------------------------------------------------------------
// convergence

struct ConvergenceResult {
  ExperimentConfig config;
  std::string hash;
  std::vector<OptimizerReport> runs;
  std::vector<double> wall_time_s;
};

inline ConvergenceResult run_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  ConvergenceResult res{cfg, config_hash(cfg), {}, {}};
  const auto net = cfg.network(cfg.snr_db);
  const auto ch = effective_channel(net, resolve_relay(cfg, net));
  const auto space = enumerate_vectors(parse_constellation(cfg.constellation), cfg.block_length);
  const auto opt = effective_optimizer(cfg);
  for (const auto& method : cfg.baselines) {
    const auto t0 = std::chrono::steady_clock::now();
    if (method == kTwoStep) res.runs.push_back(optimize_two_step(ch, space, opt, cfg.seed));
    else if (method == kGradient) res.runs.push_back(direct_gradient_baseline(ch, space, opt, cfg.seed));
    else throw std::invalid_argument("convergence supports methods 'two-step' and 'gradient', not '" + method + "'");
    res.wall_time_s.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return res;
}

/// Columns: iter,method,bits_per_use,std_err,phase,seed,samples,config_hash.
inline void write_convergence_csv(std::ostream& os, const ConvergenceResult& r) {
  os << "iter,method,bits_per_use,std_err,phase,seed,samples,config_hash\n";
  for (const auto& run : r.runs)
    for (const auto& e : run.mi_trace)
      os << e.iteration << ',' << run.method << ',' << format_double(e.bits_per_use) << ','
         << format_double(e.std_err) << ',' << to_string(e.phase) << ',' << run.seed << ','
         << r.config.optimizer.trace_samples << ',' << r.hash << '\n';
}

// ---------------------------------------------------------------------------------------------
// sweep

struct SweepRow {
  double snr_db = 0;
  std::string method;
  double bits_per_use = 0;
  double std_err = 0;
  int iterations = 0;
  double wall_time_s = 0;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
};

struct SweepResult {
  ExperimentConfig config;
  std::string hash;
  std::vector<SweepRow> rows;  // sorted by (snr_db, method)
};

inline std::uint64_t sweep_point_seed(std::uint64_t seed, double snr_db) {
  return mix_seed(seed, 0x5EE9000000ULL + static_cast<std::uint64_t>(std::llround(snr_db * 1000.0)));
}

inline std::vector<SweepRow> sweep_point(const ExperimentConfig& cfg, double snr) {
  const auto net = cfg.network(snr);
  const auto ch = effective_channel(net, resolve_relay(cfg, net));
  const auto space = enumerate_vectors(parse_constellation(cfg.constellation), cfg.block_length);
  const auto opt = effective_optimizer(cfg);
  const std::uint64_t seed = sweep_point_seed(cfg.seed, snr);
  const auto batch = NoiseBatch::generate(space.dim(), cfg.samples, mix_seed(seed, stream::kReport));

  std::vector<SweepRow> rows;
  for (const auto& method : cfg.baselines) {
    const auto t0 = std::chrono::steady_clock::now();
    SweepRow row{snr, method};
    row.seed = seed;
    row.samples = cfg.samples;
    MiEstimate est;
    if (method == kTwoStep) {
      const auto rep = optimize_two_step(ch, space, opt, seed);
      est = rep.final_mi;
      row.iterations = rep.iterations;
    } else if (method == kGradient) {
      const auto rep = direct_gradient_baseline(ch, space, opt, seed);
      est = rep.final_mi;
      row.iterations = rep.iterations;
    } else if (method == kNoPrecoding) {
      est = mutual_information(ch.H, no_precoding(ch.dim()).matrix(), space, batch, opt.estimator);
    } else {
      est = mutual_information(ch.H, gaussian_waterfilling_baseline(ch).matrix(), space, batch, opt.estimator);
    }
    row.bits_per_use = est.bits_per_use;
    row.std_err = est.std_err;
    row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Runs every grid point on a pool of `cfg.workers` threads; rows are sorted afterwards, so
/// the output does not depend on scheduling.
inline SweepResult run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  SweepResult res{cfg, config_hash(cfg), {}};
  const auto& grid = cfg.snr_grid;
  std::vector<std::vector<SweepRow>> per_point(grid.size());
  std::vector<std::exception_ptr> errors(grid.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      try {
        per_point[i] = sweep_point(cfg, grid[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned w = std::max(1u, std::min<unsigned>(cfg.workers, static_cast<unsigned>(grid.size())));
  if (w == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < w; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (auto& p : per_point)
    for (auto& r : p) res.rows.push_back(std::move(r));
  std::sort(res.rows.begin(), res.rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return a.snr_db != b.snr_db ? a.snr_db < b.snr_db : a.method < b.method;
  });
  return res;
}

/// Columns: snr_db,method,bits_per_use,std_err,iterations,seed,samples,config_hash.
/// Wall time is reported in the JSON report only, keeping the CSV reproducible byte for byte.
inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  os << "snr_db,method,bits_per_use,std_err,iterations,seed,samples,config_hash\n";
  for (const auto& row : r.rows)
    os << format_double(row.snr_db) << ',' << row.method << ',' << format_double(row.bits_per_use) << ','
       << format_double(row.std_err) << ',' << row.iterations << ',' << row.seed << ',' << row.samples << ','
       << r.hash << '\n';
}

/// First SNR at which a curve reaches `target`, by linear interpolation between grid points.
inline std::optional<double> snr_at_level(const std::vector<std::pair<double, double>>& curve, double target) {
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    const auto [s0, v0] = curve[i];
    const auto [s1, v1] = curve[i + 1];
    if (v0 >= target) return s0;
    if (v1 >= target) return s0 + (target - v0) * (s1 - s0) / (v1 - v0);
  }
  if (!curve.empty() && curve.back().second >= target) return curve.back().first;
  return std::nullopt;
}

inline std::vector<std::pair<double, double>> sweep_curve(const SweepResult& r, const std::string& method) {
  std::vector<std::pair<double, double>> c;
  for (const auto& row : r.rows)
    if (row.method == method) c.emplace_back(row.snr_db, row.bits_per_use);
  return c;
}

// ---------------------------------------------------------------------------------------------
// JSON

inline nlohmann::json matrix_json(const CMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

inline nlohmann::json to_json(const MiEstimate& e) {
  return {{"bits_per_use", e.bits_per_use}, {"std_err", e.std_err}, {"samples", e.samples}, {"seed", e.seed}};
}

inline nlohmann::json to_json(const OptimizerReport& r) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& t : r.mi_trace)
    trace.push_back({{"iteration", t.iteration}, {"bits_per_use", t.bits_per_use}, {"std_err", t.std_err},
                     {"phase", to_string(t.phase)}});
  nlohmann::json j{{"method", r.method},
                   {"seed", r.seed},
                   {"converged", r.converged},
                   {"rounds", r.rounds},
                   {"iterations", r.iterations},
                   {"initial_mi", to_json(r.initial_mi)},
                   {"final_mi", to_json(r.final_mi)},
                   {"stationarity_residual", {{"initial", r.initial_residual}, {"final", r.final_residual}}},
                   {"trace", trace}};
  if (!r.error.empty()) j["error"] = r.error;
  if (r.final) {
    std::vector<double> lambda(r.final->lambda.data(), r.final->lambda.data() + r.final->lambda.size());
    j["precoder"] = {{"U", matrix_json(r.final->U)},
                     {"lambda", lambda},
                     {"V", matrix_json(r.final->V.matrix())},
                     {"P", matrix_json(r.final->matrix())},
                     {"power", r.final->power()}};
  }
  return j;
}

inline nlohmann::json config_json(const ExperimentConfig& c) {
  return {{"canonical", canonical_config(c)}, {"hash", config_hash(c)}};
}

inline nlohmann::json to_json(const ConvergenceResult& r) {
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    auto j = to_json(r.runs[i]);
    j["wall_time_s"] = r.wall_time_s[i];
    runs.push_back(std::move(j));
  }
  return {{"config", config_json(r.config)}, {"runs", runs}};
}

inline nlohmann::json to_json(const SweepResult& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"snr_db", row.snr_db},
                    {"method", row.method},
                    {"bits_per_use", row.bits_per_use},
                    {"std_err", row.std_err},
                    {"iterations", row.iterations},
                    {"wall_time_s", row.wall_time_s},
                    {"seed", row.seed},
                    {"samples", row.samples}});
  return {{"config", config_json(r.config)}, {"rows", rows}};
}

}  // namespace relayprec
