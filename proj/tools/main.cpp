#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gdl/commands.hpp"
#include "gdl/config.hpp"
#include "gdl/error.hpp"

namespace {

// Exit codes: 0 success, 2 invalid config, 3 I/O failure, 4 numerical or
// data failure (training divergence, no-signal, empty evaluation set, ...).
int run_command(const std::string& name, const std::string& config_path,
                const std::vector<std::string>& overrides) {
  try {
    const gdl::cli::ExperimentConfig cfg =
        gdl::cli::load_config(config_path, overrides);
    if (name == "simulate") gdl::cli::cmd_simulate(cfg, std::cout);
    else if (name == "train") gdl::cli::cmd_train(cfg, std::cout);
    else if (name == "infer") gdl::cli::cmd_infer(cfg, std::cout);
    else if (name == "eval") gdl::cli::cmd_eval(cfg, std::cout);
    else if (name == "sweep") gdl::cli::cmd_sweep(cfg, std::cout);
    else gdl::cli::cmd_render(cfg, std::cout);
    return 0;
  } catch (const gdl::cli::ConfigError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const gdl::UnsupportedFeatureError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const gdl::IoError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 3;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 4;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale gated imaging and depth-from-gating laboratory"};
  app.require_subcommand(1);

  struct SubArgs {
    std::string config;
    std::vector<std::string> sets;
  };
  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "render noisy gated slices of a synthetic scene"},
      {"train", "train the per-pixel depth regressor on simulated data"},
      {"infer", "produce depth (and uncertainty) maps from slices"},
      {"eval", "compute depth metrics against ground truth"},
      {"sweep", "trace a coverage-vs-error filtering curve"},
      {"render", "visualize a float map as a grayscale image"},
  };
  std::vector<SubArgs> args(std::size(commands));
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    CLI::App* sub = app.add_subcommand(commands[i].first, commands[i].second);
    sub->add_option("--config", args[i].config, "experiment config file")
        ->required();
    sub->add_option("--set", args[i].sets,
                    "override a config key, e.g. --set train.epochs=5");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  for (std::size_t i = 0; i < std::size(commands); ++i)
    if (app.get_subcommand(commands[i].first)->parsed())
      return run_command(commands[i].first, args[i].config, args[i].sets);
  return 2;
}
