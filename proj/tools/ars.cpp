// ars: command-line driver for the synthetic-corpus generator and the
// ranking pipeline.

#include "ars/pipeline.hpp"
#include "ars/synth.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>

extern char** environ;

namespace {

ars::PipelineConfig load(const std::string& config_path, const std::optional<std::uint64_t>& seed,
                         const std::string& workdir) {
  auto config = config_path.empty() ? ars::PipelineConfig{} : ars::parse_config(config_path);
  ars::apply_env_overrides(config, environ);
  if (seed) ars::override_seeds(config, *seed);
  if (!workdir.empty()) config.paths.workdir = workdir;
  return config;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rising-star ranking pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::string workdir;
  std::string stages = "all";
  std::optional<std::uint64_t> seed;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--workdir", workdir, "Working directory for artifacts");
    cmd->add_option("--seed", seed, "Override every stage seed");
  };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus at paths.corpus");
  add_common(synth);
  auto* run = app.add_subcommand("run", "Run pipeline stages");
  add_common(run);
  run->add_option("--stages", stages, "Comma-separated stages or 'all'");
  auto* rep = app.add_subcommand("report", "Summarize evaluation artifacts of a workdir");
  add_common(rep);

  CLI11_PARSE(app, argc, argv);

  try {
    auto config = load(config_path, seed, workdir);
    if (synth->parsed()) {
      const auto sc = config.synth.value_or(ars::SynthConfig{});
      const auto path = config.corpus_path();
      ars::write_synthetic(sc, path);
      fmt::print("wrote {}\n", path.string());
    } else if (run->parsed()) {
      const auto list = ars::parse_stages(stages);
      if (list.empty()) throw std::runtime_error("no stages selected");
      ars::run_pipeline(config, list);
      fmt::print("stages done: {}\n", fmt::join(list, ","));
    } else {
      fmt::print("{}", ars::report(config.paths.workdir));
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
