// spikelab — simulation and verification laboratory for spiked covariance
// fluctuation laws.
//
// Subcommands:
//   theory    closed-form limit predictions for a model config (JSON/CSV)
//   oracle    closed-form m-functions vs adaptive MP quadrature
//   simulate  Monte Carlo ensemble of extreme-eigenstructure statistics (CSV)
//   verify    simulate + compare every limit law at an SE multiplier
//   clt       bilinear-form CLT harness: covariance, trace limits, decay scan
//
// Exit codes: 0 pass, 1 statistical failure, 2 configuration or model error.
// Every flag can be supplied via an SPIKELAB_* environment variable.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spikelab/bilinear.hpp"
#include "spikelab/errors.hpp"
#include "spikelab/fluctuations.hpp"
#include "spikelab/io.hpp"
#include "spikelab/model.hpp"
#include "spikelab/quadrature.hpp"
#include "spikelab/verify.hpp"

namespace {

using namespace spikelab;

struct Artifacts {
  std::string out_dir;                  // empty = print to stdout
  std::vector<std::string> written;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void emit(const std::string& filename, const std::string& content) {
    if (out_dir.empty()) {
      std::fputs(content.c_str(), stdout);
      return;
    }
    const auto path = (std::filesystem::path(out_dir) / filename).string();
    io::write_text_file(path, content);
    written.push_back(path);
  }

  void finish(const std::string& command, const std::string& config_path,
              const std::string& config_text, std::uint64_t seed, int replicates) {
    if (out_dir.empty()) return;
    io::RunManifest manifest;
    manifest.command = command;
    manifest.config_path = config_path;
    manifest.config_hash = config_text.empty() ? "" : io::fnv1a_hex(config_text);
    manifest.master_seed = seed;
    manifest.replicates = replicates;
    manifest.artifacts = written;
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest.version = io::kVersion;
    io::write_text_file((std::filesystem::path(out_dir) / "manifest.json").string(),
                        io::manifest_json(manifest));
  }
};

std::string join_args(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += ' ';
    out += argv[i];
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const double value = std::stod(item, &used);
    if (used != item.size())
      throw std::invalid_argument(std::string(what) + ": cannot parse number \"" + item + "\"");
    out.push_back(value);
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  for (double value : parse_double_list(text, what)) out.push_back(static_cast<int>(value));
  return out;
}

// "identity,banded=1:0.5,resolvent_a=4,resolvent_c=4" -> matrix specs
std::vector<bilinear::MatrixSpec> parse_matrices(const std::string& text) {
  std::vector<bilinear::MatrixSpec> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    bilinear::MatrixSpec spec;
    const auto eq = item.find('=');
    const std::string name = item.substr(0, eq);
    const std::string arg = eq == std::string::npos ? "" : item.substr(eq + 1);
    if (name == "identity") {
      spec.kind = bilinear::MatrixKind::Identity;
    } else if (name == "banded") {
      spec.kind = bilinear::MatrixKind::SymmetricBanded;
      std::stringstream ps(arg);
      std::string c;
      while (std::getline(ps, c, ':'))
        if (!c.empty()) spec.profile.push_back(std::stod(c));
      if (spec.profile.empty())
        throw std::invalid_argument("banded matrix needs a profile, e.g. banded=1:0.5");
    } else if (name == "resolvent_a" || name == "resolvent_c") {
      spec.kind = name == "resolvent_a" ? bilinear::MatrixKind::ResolventA
                                        : bilinear::MatrixKind::ResolventC;
      if (arg.empty())
        throw std::invalid_argument(name + " needs a spike value, e.g. " + name + "=4");
      spec.alpha = std::stod(arg);
    } else {
      throw std::invalid_argument("unknown matrix kind \"" + name + "\"");
    }
    out.push_back(std::move(spec));
  }
  if (out.empty()) throw std::invalid_argument("matrix list is empty");
  return out;
}

bilinear::VectorLawKind parse_law(const std::string& name) {
  for (auto kind : {bilinear::VectorLawKind::SharedGaussian,
                    bilinear::VectorLawKind::IndependentGaussian,
                    bilinear::VectorLawKind::SharedRademacher,
                    bilinear::VectorLawKind::SharedUniformSym}) {
    if (bilinear::law_name(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown vector law \"" + name + "\"");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spiked-covariance fluctuation laboratory"};
  app.set_version_flag("--version", io::kVersion);
  app.require_subcommand(1);
  const std::string command_line = join_args(argc, argv);

  // Shared option storage.
  std::string config_path;
  std::string theory_config_path;
  std::string out_dir;
  std::string alphas_text = "4,2.5,0.2,0.1";
  std::string matrices_text = "identity";
  std::string law_text = "shared_gaussian";
  std::string n_grid_text;
  int replicates = 0;  // 0 = subcommand default
  bool seed_given = false;
  std::uint64_t seed = 1;
  int workers = 1;
  double se_mult = 5.0;
  double tol = 1e-10;
  double gamma_sq = 4.0;
  int clt_n = 1000;
  double kappa = 0.0;

  auto add_common = [&](CLI::App* sub, bool with_config) {
    if (with_config)
      sub->add_option("--config", config_path, "model config JSON file")
          ->envname("SPIKELAB_CONFIG")
          ->required();
    sub->add_option("--out", out_dir, "output directory (default: print to stdout)")
        ->envname("SPIKELAB_OUT");
  };
  auto add_run = [&](CLI::App* sub, int default_replicates) {
    sub->add_option("--replicates", replicates, "Monte Carlo replicates")
        ->envname("SPIKELAB_REPLICATES")
        ->default_val(default_replicates);
    sub->add_option("--seed", seed, "master seed; every stream derives from it")
        ->envname("SPIKELAB_SEED")
        ->trigger_on_parse()
        ->each([&](const std::string&) { seed_given = true; });
    sub->add_option("--workers", workers, "worker threads")->envname("SPIKELAB_WORKERS");
  };

  CLI::App* theory = app.add_subcommand("theory", "closed-form limit predictions");
  add_common(theory, true);

  CLI::App* oracle = app.add_subcommand("oracle", "m-functions vs MP quadrature");
  add_common(oracle, false);
  oracle->add_option("--gamma-sq", gamma_sq, "aspect ratio gamma^2 (> 1)")
      ->envname("SPIKELAB_GAMMA_SQ");
  oracle->add_option("--alphas", alphas_text, "comma-separated spike grid")
      ->envname("SPIKELAB_ALPHAS");
  oracle->add_option("--tol", tol, "relative tolerance for quadrature and the verdict")
      ->envname("SPIKELAB_TOL");

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo ensemble CSV");
  add_common(simulate, true);
  add_run(simulate, 100);

  CLI::App* verify_cmd = app.add_subcommand("verify", "simulate and test every limit law");
  add_common(verify_cmd, true);
  add_run(verify_cmd, 500);
  verify_cmd
      ->add_option("--theory-config", theory_config_path,
                   "evaluate predictions from this config instead (falsification control)")
      ->envname("SPIKELAB_THEORY_CONFIG");
  verify_cmd->add_option("--se-mult", se_mult, "pass threshold in SE units")
      ->envname("SPIKELAB_SE_MULT");

  CLI::App* clt = app.add_subcommand("clt", "bilinear-form CLT harness");
  add_common(clt, false);
  add_run(clt, 2000);
  clt->add_option("--matrices", matrices_text,
                  "e.g. identity,banded=1:0.5,resolvent_a=4,resolvent_c=4")
      ->envname("SPIKELAB_MATRICES");
  clt->add_option("--law", law_text,
                  "shared_gaussian | independent_gaussian | shared_rademacher | shared_uniform_sym")
      ->envname("SPIKELAB_LAW");
  clt->add_option("--gamma-sq", gamma_sq, "aspect ratio for resolvent matrices")
      ->envname("SPIKELAB_GAMMA_SQ");
  clt->add_option("--n", clt_n, "vector dimension")->envname("SPIKELAB_N");
  clt->add_option("--se-mult", se_mult, "pass threshold in SE units")->envname("SPIKELAB_SE_MULT");
  clt->add_option("--kappa", kappa, "run the remainder decay scan at this exponent in (0, 1/2)")
      ->envname("SPIKELAB_KAPPA");
  clt->add_option("--n-grid", n_grid_text, "decay scan grid, e.g. 500,2000,8000")
      ->envname("SPIKELAB_N_GRID");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Fold usage errors into the configuration-error exit code; --help and
    // --version still exit 0.
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Artifacts artifacts;
    artifacts.out_dir = out_dir;
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

    if (theory->parsed()) {
      const std::string text = io::read_text_file(config_path);
      const io::LoadedConfig loaded = io::parse_config(text);
      artifacts.emit("theory.json", io::theory_json(loaded.config));
      if (!out_dir.empty()) artifacts.emit("theory.csv", io::theory_csv(loaded.config));
      artifacts.finish(command_line, config_path, text, loaded.seed, 0);
      return 0;
    }

    if (oracle->parsed()) {
      if (!(tol > 1e-14))
        throw NonConvergence("tolerance " + io::format_double(tol) +
                             " is below attainable quadrature precision (needs > 1e-14)");
      const std::vector<double> alphas = parse_double_list(alphas_text, "--alphas");
      quadrature::MomentReport report;
      report.rel_tol = tol;
      if (!alphas.empty()) report = quadrature::verify_m_report(mp::AspectRatio{gamma_sq}, alphas, tol);
      artifacts.emit("oracle.csv", io::moment_report_csv(report));
      if (!out_dir.empty()) artifacts.emit("oracle.json", io::moment_report_json(report));
      artifacts.finish(command_line, "", "", 0, 0);
      const bool pass = !report.any_flagged() && report.max_rel_err() <= tol;
      std::fprintf(stderr, "oracle: %s (entries=%zu, max_rel_err=%.3e)\n",
                   pass ? "PASS" : "FAIL", report.entries.size(), report.max_rel_err());
      return pass ? 0 : 1;
    }

    if (simulate->parsed()) {
      const std::string text = io::read_text_file(config_path);
      const io::LoadedConfig loaded = io::parse_config(text);
      const std::uint64_t master = seed_given ? seed : loaded.seed;
      const auto ensemble =
          fluctuations::run_ensemble(loaded.config, replicates, master, workers);
      artifacts.emit("ensemble.csv", io::ensemble_csv(ensemble));
      artifacts.finish(command_line, config_path, text, master, replicates);
      std::fprintf(stderr, "simulate: %zu replicates ok, %zu flagged\n", ensemble.stats.size(),
                   ensemble.flagged.size());
      return 0;
    }

    if (verify_cmd->parsed()) {
      const std::string text = io::read_text_file(config_path);
      const io::LoadedConfig loaded = io::parse_config(text);
      ModelConfig theory_config = loaded.config;
      if (!theory_config_path.empty())
        theory_config = io::load_config(theory_config_path).config;
      verify::VerifyOptions opts;
      opts.replicates = replicates;
      opts.master_seed = seed_given ? seed : loaded.seed;
      opts.se_multiplier = se_mult;
      opts.workers = workers;
      const auto report = verify::run_verify(loaded.config, theory_config, opts);
      artifacts.emit("verify.csv", io::comparison_csv(report));
      if (!out_dir.empty()) artifacts.emit("verify.json", io::comparison_json(report));
      artifacts.finish(command_line, config_path, text, opts.master_seed, replicates);
      std::fprintf(stderr, "verify: %s (%zu rows, se multiplier %g)\n",
                   report.pass ? "PASS" : "FAIL", report.rows.size(), report.se_multiplier);
      return report.pass ? 0 : 1;
    }

    if (clt->parsed()) {
      bilinear::CltSpec spec;
      spec.matrices = parse_matrices(matrices_text);
      spec.law.kind = parse_law(law_text);
      stats::ComparisonReport report;
      if (kappa != 0.0) {
        std::vector<int> grid = n_grid_text.empty() ? std::vector<int>{500, 2000, 8000}
                                                    : parse_int_list(n_grid_text, "--n-grid");
        if (spec.matrices.size() != 1)
          throw std::invalid_argument("decay scan takes exactly one matrix");
        report = verify::decay_comparison(bilinear::decay_check(
            spec.matrices[0], spec.law, gamma_sq, kappa, grid, replicates, seed));
      } else {
        report = verify::run_clt_verify(spec, gamma_sq, clt_n, replicates, seed, se_mult);
      }
      artifacts.emit("clt.csv", io::comparison_csv(report));
      if (!out_dir.empty()) artifacts.emit("clt.json", io::comparison_json(report));
      artifacts.finish(command_line, "", "", seed, replicates);
      std::fprintf(stderr, "clt: %s (%zu rows)\n", report.pass ? "PASS" : "FAIL",
                   report.rows.size());
      return report.pass ? 0 : 1;
    }
  } catch (const TransitionWindow& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 2;
  } catch (const NonConvergence& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 2;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 2;
  }
  return 2;  // unreachable: a subcommand is required
}
