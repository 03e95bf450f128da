#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace rcas::cli;
  CLI::App app{"Regularized complementary antenna switching: split design, adaptive selection, oracles and simulation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommandOptions opts;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string strategy;

  auto add = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config_path, "run configuration (JSON)")->required();
    sub->add_option("--seed", seed, "override simulation.seed");
    sub->add_option("--out", out_dir, "override output.directory");
    sub->add_flag("--quiet", opts.quiet, "suppress the summary on stdout");
    return sub;
  };
  add("design-split", "complementary split of the full array (DCSA)");
  add("design-adaptive", "environment-adapted sparse array and combined beamformer (RASA)");
  add("enumerate", "exhaustive oracle ranking")
      ->add_option("--oracle", opts.oracle, "split, capon or combined")
      ->check(CLI::IsMember({"split", "capon", "combined"}));
  add("simulate-dynamic", "per-sample SINR traces over a changing environment")
      ->add_option("--strategy", strategy, "run a single strategy")
      ->check(CLI::IsMember({"fixed", "rcas", "coarray"}));
  add("sweep-snapshots", "mean SINR against the snapshot count, switched vs coarray sensing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  auto* sub = app.get_subcommands().front();
  if (sub->count("--seed")) opts.seed = seed;
  if (sub->count("--out")) opts.out_dir = out_dir;
  if (sub->get_name() == "simulate-dynamic" && sub->count("--strategy")) {
    opts.strategy = strategy;
  }
  return run_command(sub->get_name(), opts, {std::cout, std::cerr});
}
