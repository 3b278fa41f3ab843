#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"
#include "plap/plap.h"

int main(int argc, char** argv) {
  CLI::App app{"Radial p-Laplacian toolkit"};
  app.set_version_flag("--version", plap_version());
  app.require_subcommand(1, 1);

  std::string config;
  plapcli::CommandOptions options;
  for (const char* name : {"map", "check", "certify", "solve"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "Config file (INI)")->required();
    sub->add_option("--out", options.out_dir, "Output directory (overrides output.directory)");
    sub->add_option("--threads", options.threads, "Worker thread cap")->check(CLI::PositiveNumber);
    sub->add_flag("--force", options.force, "Certify even if the hypotheses fail");
  }
  app.get_subcommand("map")->description("Write the coordinate table r,t,q");
  app.get_subcommand("check")->description("Check the plateau, ratio and growth hypotheses on the configured nonlinearity");
  app.get_subcommand("certify")->description("Evaluate the test-function certificates");
  app.get_subcommand("solve")->description("Find non-negative solutions by shooting");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return plapcli::kInvalidInput;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  return plapcli::run(command, config, options, std::cout, std::cerr);
}
