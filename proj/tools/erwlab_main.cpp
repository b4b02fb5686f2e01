// erwlab: monte carlo laboratory for excited random walks on Z^d.
//
// exit codes: 0 ok, 1 condition violated, 2 bad configuration, 3 missing input

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "erwlab/config.hpp"
#include "erwlab/errors.hpp"
#include "erwlab/runner.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
  std::optional<std::string> format;
};

void attach(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "run configuration (json)")
      ->required()
      ->type_name("PATH");
  cmd->add_option("--seed", o.seed, "override the master seed");
  cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  cmd->add_option("--out", o.out, "override the output directory")->type_name("DIR");
  cmd->add_option("--format", o.format, "stats format")
      ->check(CLI::IsMember({"json", "csv"}));
}

erwlab::RunConfig load_with_overrides(const CommonOpts& o) {
  erwlab::RunConfig cfg = erwlab::RunConfig::load(o.config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (o.out) cfg.out_dir = *o.out;
  if (o.format) cfg.format = *o.format;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"monte carlo laboratory for excited random walks on Z^d"};
  app.require_subcommand(1);

  CommonOpts vo, so, ao, co;
  CLI::App* validate = app.add_subcommand("validate", "certify the step kernel conditions");
  attach(validate, vo);
  CLI::App* simulate = app.add_subcommand("simulate", "run the trajectory ensembles");
  attach(simulate, so);
  CLI::App* analyze = app.add_subcommand("analyze", "estimate from simulate outputs");
  attach(analyze, ao);
  CLI::App* checks = app.add_subcommand("checks", "run the full theory-check battery");
  attach(checks, co);
  app.add_subcommand("print-defaults", "write the default configuration to stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("print-defaults")) {
      std::cout << erwlab::RunConfig::defaults().to_json().dump(2) << "\n";
      return 0;
    }
    if (app.got_subcommand(validate)) return erwlab::cmd_validate(load_with_overrides(vo), std::cout);
    if (app.got_subcommand(simulate)) return erwlab::cmd_simulate(load_with_overrides(so), std::cout);
    if (app.got_subcommand(analyze)) return erwlab::cmd_analyze(load_with_overrides(ao), std::cout);
    if (app.got_subcommand(checks)) return erwlab::cmd_checks(load_with_overrides(co), std::cout);
  } catch (const erwlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const erwlab::MissingInputError& e) {
    std::cerr << "missing input: " << e.what() << "\n";
    return 3;
  } catch (const erwlab::ValidationError& e) {
    std::cerr << "condition violated: " << e.what() << "\n";
    return 1;
  } catch (const erwlab::InsufficientDataError& e) {
    std::cerr << "insufficient data: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
