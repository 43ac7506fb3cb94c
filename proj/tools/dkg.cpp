// dkg: command-line front end for the lattice kink toolkit.
//
//   dkg <task> --config <file> [--out <dir>] [--workers k]
//   dkg figure <id> [--out <dir>] [--workers k]
//
// Exit codes: 0 ok, 1 other failure, 2 config error (nothing written),
// 3 convergence failure, 4 hypothesis violation.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dkg/errors.hpp"
#include "dkg/experiments.hpp"
#include "dkg/io.hpp"

namespace {

enum Exit { ok = 0, other = 1, config_error = 2, convergence = 3, hypothesis = 4 };

std::filesystem::path default_out(const std::string& cli, const std::string& from_config, const std::string& leaf) {
  if (!cli.empty()) return cli;
  if (!from_config.empty()) return from_config;
  if (const char* env = std::getenv("DKG_OUT_DIR"); env && *env) return std::filesystem::path(env) / leaf;
  return std::filesystem::path("dkg_out") / leaf;
}

int report(const char* kind, const std::exception& e, int code) {
  std::cerr << "dkg: " << kind << ": " << e.what() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete Klein-Gordon kinks: equilibria, spectra, multi-kink predictions, dynamics"};
  app.require_subcommand(1);
  std::string out_dir;
  int workers = 1;
  app.add_option("--out", out_dir, "output directory (default $DKG_OUT_DIR/<task> or ./dkg_out/<task>)");
  app.add_option("--workers", workers, "worker threads for independent sub-runs")->check(CLI::PositiveNumber);

  std::string config_path;
  for (const auto& t : dkg::task_names()) {
    auto* sub = app.add_subcommand(t, "run the " + t + " pipeline");
    sub->add_option("--config", config_path, "JSON experiment config")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  }
  std::string figure_id;
  auto* fig = app.add_subcommand("figure", "reproduce the data behind a figure");
  fig->add_option("id", figure_id, "figure id")->required()->check(CLI::IsMember(dkg::figure_ids()));
  fig->add_option("--out", out_dir, "output directory");
  fig->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_subcommand("figures", "list figure ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? Exit::ok : Exit::config_error;
  }
  const auto* chosen = app.get_subcommands().front();
  const std::string started = dkg::utc_now();

  if (chosen->get_name() == "figures") {
    for (const auto& id : dkg::figure_ids()) std::cout << id << "\n";
    return Exit::ok;
  }

  dkg::ExperimentConfig cfg;
  if (chosen->get_name() != "figure") {
    try {
      std::ifstream f(config_path);
      if (!f) throw dkg::ConfigError("cannot read config file '" + config_path + "'");
      dkg::Json j;
      try {
        j = dkg::Json::parse(f);
      } catch (const dkg::Json::exception& e) {
        throw dkg::ConfigError(std::string("malformed JSON: ") + e.what());
      }
      cfg = dkg::parse_config(j, chosen->get_name());
    } catch (const dkg::ConfigError& e) {
      return report("config error", e, Exit::config_error);
    } catch (const dkg::Json::exception& e) {
      return report("config error", e, Exit::config_error);
    }
  }

  try {
    dkg::RunOutput run;
    std::filesystem::path dir;
    if (chosen->get_name() == "figure") {
      run = dkg::reproduce_figure(figure_id, workers);
      dir = default_out(out_dir, "", "figure_" + figure_id);
    } else {
      run = dkg::run_task(cfg, workers);
      dir = default_out(out_dir, cfg.output_dir, cfg.task);
    }
    for (const auto& w : run.warnings) std::cerr << "dkg: warning: " << w << "\n";
    const auto written = dkg::write_run(run, dir, started);
    for (const auto& p : written.files) std::cout << p.string() << "\n";
    return Exit::ok;
  } catch (const dkg::ConfigError& e) {
    return report("config error", e, Exit::config_error);
  } catch (const dkg::HypothesisViolation& e) {
    return report("hypothesis violation", e, Exit::hypothesis);
  } catch (const dkg::ConvergenceError& e) {
    return report("convergence failure", e, Exit::convergence);
  } catch (const std::exception& e) {
    return report("error", e, Exit::other);
  }
}
