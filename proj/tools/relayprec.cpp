// relayprec command-line tool: experiment runners plus direct access to the estimator and the
// unitary projection.
//
// Settings precedence: built-in preset < --config file < command-line flags.

#include "relayprec/experiment.hpp"
#include "relayprec/manifold.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <optional>

namespace rp = relayprec;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<double> snr_db;
  std::optional<std::string> constellation;
  std::optional<std::string> baselines;
  std::optional<unsigned> workers;
  std::vector<std::string> set;
  std::string out;
  std::string json;
};

void add_common(CLI::App* app, CommonFlags& f, bool with_baselines) {
  app->add_option("--config", f.config, "key = value configuration file")->check(CLI::ExistingFile);
  app->add_option("--seed", f.seed, "master seed");
  app->add_option("--samples", f.samples, "noise samples N for reported estimates");
  app->add_option("--snr-db", f.snr_db, "SNR in dB (Ps = Pr); replaces the SNR grid");
  app->add_option("--constellation", f.constellation, "bpsk, qpsk, 8psk, 4pam, 16qam, ...");
  if (with_baselines) app->add_option("--baselines", f.baselines, "comma-separated method list");
  app->add_option("--workers", f.workers, "worker threads");
  app->add_option("--set", f.set, "extra key=value override (repeatable)");
  app->add_option("--out", f.out, "CSV / text output path (default: stdout)");
}

rp::ExperimentConfig resolve(rp::ExperimentConfig base, const CommonFlags& f) {
  if (!f.config.empty()) base = rp::load_config(f.config, std::move(base));
  if (f.seed) base.seed = *f.seed;
  if (f.samples) rp::apply_setting(base, "samples", std::to_string(*f.samples));
  if (f.snr_db) rp::apply_setting(base, "snr_db", rp::format_double(*f.snr_db));
  if (f.constellation) base.constellation = *f.constellation;
  if (f.baselines) rp::apply_setting(base, "baselines", *f.baselines);
  if (f.workers) base.workers = *f.workers;
  for (const auto& kv : f.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw rp::parse_error("--set expects key=value, got '" + kv + "'");
    rp::apply_setting(base, rp::detail::trim(kv.substr(0, eq)), rp::detail::trim(kv.substr(eq + 1)));
  }
  base.validate();
  return base;
}

template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  fn(f);
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

void write_json(const std::string& path, const nlohmann::json& j) {
  if (path.empty()) return;
  with_output(path, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-alphabet precoder optimization for amplify-and-forward relay channels"};
  app.require_subcommand(1);

  CommonFlags conv_f, sweep_f, mi_f;
  std::string precoder_out, precoder_in, project_in, project_out;

  auto* conv = app.add_subcommand("convergence", "MI trace of two-step and direct-gradient runs (BPSK, 3 dB preset)");
  add_common(conv, conv_f, true);
  conv->add_option("--json", conv_f.json, "JSON report path");
  conv->add_option("--precoder-out", precoder_out, "write the final two-step precoder P");

  auto* sweep = app.add_subcommand("sweep", "MI versus SNR for each method (QPSK, -10..20 dB preset)");
  add_common(sweep, sweep_f, true);
  sweep->add_option("--json", sweep_f.json, "JSON report path");

  auto* mi = app.add_subcommand("mi", "estimate the MI of a stored precoder; prints JSON");
  add_common(mi, mi_f, false);
  mi->add_option("--precoder", precoder_in, "precoder matrix file, or 'identity'")->required();

  auto* project = app.add_subcommand("project", "nearest unitary matrix to a square matrix");
  project->add_option("--in", project_in, "matrix file (default: stdin)");
  project->add_option("--out", project_out, "output path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*conv) {
      const auto cfg = resolve(rp::convergence_preset(), conv_f);
      const auto res = rp::run_convergence(cfg);
      with_output(conv_f.out, [&](std::ostream& os) { rp::write_convergence_csv(os, res); });
      write_json(conv_f.json, rp::to_json(res));
      if (!precoder_out.empty()) {
        for (const auto& r : res.runs)
          if (r.method == rp::kTwoStep && r.final) rp::write_matrix_file(precoder_out, r.final->matrix());
      }
      for (const auto& r : res.runs) {
        std::cerr << r.method << ": " << r.final_mi.bits_per_use << " +/- " << r.final_mi.std_err << " bits/use, "
                  << r.iterations << " iterations" << (r.converged ? "" : " (not converged)") << '\n';
        if (!r.error.empty()) std::cerr << "  error: " << r.error << '\n';
      }
    } else if (*sweep) {
      const auto res = rp::run_sweep(resolve(rp::sweep_preset(), sweep_f));
      with_output(sweep_f.out, [&](std::ostream& os) { rp::write_sweep_csv(os, res); });
      write_json(sweep_f.json, rp::to_json(res));
    } else if (*mi) {
      const auto cfg = resolve(rp::convergence_preset(), mi_f);
      const auto net = cfg.network(cfg.snr_grid.front());
      const auto ch = rp::effective_channel(net, rp::resolve_relay(cfg, net));
      const auto space = rp::enumerate_vectors(rp::parse_constellation(cfg.constellation), cfg.block_length);
      const rp::CMatrix p = precoder_in == "identity" ? rp::CMatrix::Identity(space.dim(), space.dim())
                                                      : rp::read_matrix_file(precoder_in);
      if (p.rows() != space.dim() || p.cols() != space.dim())
        throw std::invalid_argument("precoder is " + std::to_string(p.rows()) + "x" + std::to_string(p.cols()) +
                                    ", expected " + std::to_string(space.dim()) + "x" + std::to_string(space.dim()));
      const double pw = rp::precoder_power(p);
      if (pw > space.dim() + rp::kPowerSlack)
        throw std::invalid_argument("precoder violates the power constraint: Tr(PP^H) = " + rp::format_double(pw) +
                                    " > " + std::to_string(space.dim()));
      const auto est = rp::mutual_information_oracle(ch.H, p, space, cfg.samples, cfg.seed,
                                                     rp::EstimatorOptions{cfg.workers});
      auto j = rp::to_json(est);
      j["config_hash"] = rp::config_hash(cfg);
      with_output(mi_f.out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    } else if (*project) {
      rp::CMatrix w;
      if (project_in.empty() || project_in == "-") {
        w = rp::read_matrix(std::cin);
      } else {
        w = rp::read_matrix_file(project_in);
      }
      if (w.rows() != w.cols()) throw std::invalid_argument("project expects a square matrix");
      const auto u = rp::project_to_stiefel(w);
      with_output(project_out, [&](std::ostream& os) { rp::write_matrix(os, u.matrix()); });
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
