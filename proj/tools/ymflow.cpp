#include <iostream>

#include <CLI11.hpp>

#include "ymf/cli.hpp"

int main(int argc, char **argv)
{
  CLI::App app{"Yang-Mills gradient flow laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output;
  int levels = 0;
  bool serial = false;

  for (const char *name : ymf::cli::commands)
  {
    CLI::App *sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--output", output, "output directory (overrides the config)");
    sub->add_option("--levels", levels, "refinement levels (overrides the config)")->check(CLI::Range(1, 6));
    sub->add_flag("--serial", serial, "force bit-deterministic serial execution");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try
  {
    ymf::cli::RunConfig config = ymf::cli::parse_config(std::filesystem::path(config_path));
    ymf::cli::Overrides overrides;
    if (!output.empty())
      overrides.output = output;
    if (levels > 0)
      overrides.levels = levels;
    overrides.serial = serial;
    ymf::cli::apply(config, overrides);
    return ymf::cli::run(command, config, std::cout);
  }
  catch (const ymf::cli::ConfigError &e)
  {
    std::cerr << e.what() << '\n';
    return 2;
  }
}
