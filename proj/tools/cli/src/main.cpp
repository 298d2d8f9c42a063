#include <iostream>

#include "CLI11.hpp"
#include "obslab_cli/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"obslab: obstacle-problem solver and free-boundary diagnostics"};
  app.require_subcommand(1, 1);

  std::string config;
  std::string out;
  unsigned seed = 0;
  unsigned threads = 0;
  obslab::cli::Overrides overrides;

  const std::vector<std::pair<const char*, const char*>> verbs{
      {"solve", "solve the configured obstacle problem"},
      {"diagnose", "free-boundary diagnostics on a solved or inline-solved field"},
      {"classify", "regular/singular classification of free-boundary points"},
      {"report", "merge reports and print the pass/fail matrix"},
  };
  for (const auto& [name, help] : verbs) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "versioned JSON config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (overrides output.dir)");
    sub->add_option("--seed", seed, "seed for the random probe forms");
    sub->add_option("--threads", threads, "worker threads (default: OBSLAB_THREADS, else 1)")->check(CLI::Range(1u, 1024u));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return obslab::cli::kUsage;
  }

  const CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--out")) overrides.out = out;
  if (sub->count("--seed")) overrides.seed = seed;
  if (sub->count("--threads")) overrides.threads = threads;
  return obslab::cli::run(sub->get_name(), config, overrides);
}
