// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "paddles/cli.hpp"

#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "paddles/config.hpp"
#include "paddles/errors.hpp"
#include "paddles/runner.hpp"

namespace paddles {

namespace {

struct Options {
  std::string verb;
  std::string target;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

std::filesystem::path output_dir(const Options& o, const ExperimentConfig& c) {
  if (!o.out.empty()) return o.out;
  if (!c.output_dir.empty()) return c.output_dir;
  throw ConfigError("output_dir: required (set it in the config or pass --out)");
}

ExperimentConfig load(const Options& o) {
  ExperimentConfig c = load_config(o.target);
  if (o.seed) c.seed = *o.seed;
  return c;
}

int dispatch(const Options& o) {
  const RunOptions run{o.quiet};
  if (o.verb == "replay") {
    const std::filesystem::path out = o.out.empty() ? std::filesystem::path(o.target) / "replay" : std::filesystem::path(o.out);
    return replay(o.target, out, run);
  }
  ExperimentConfig c = load(o);
  if (o.verb == "synth-data") {
    const auto out = output_dir(o, c);
    synthesize_data(c, out);
    if (!o.quiet) std::cout << "wrote dataset to " << out.string() << "\n";
    return kExitOk;
  }
  if (o.verb == "sweep" && c.study.kind != StudyKind::Sweep) {
    throw ConfigError("study.kind: the sweep verb needs a sweep study");
  }
  if (o.verb == "figure1" && c.study.kind != StudyKind::Figure1) {
    throw ConfigError("study.kind: the figure1 verb needs a figure1 study");
  }
  return run_experiment(c, output_dir(o, c), run);
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Spectral early stopping for learning with noisy labels"};
  app.require_subcommand(1);
  Options o;
  auto add = [&](const std::string& verb, const std::string& help, const std::string& what) {
    CLI::App* sub = app.add_subcommand(verb, help);
    sub->add_option(what, o.target, what)->required();
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "global seed (overrides the config)");
    sub->add_flag("--quiet", o.quiet, "suppress progress output");
    sub->callback([&o, verb] { o.verb = verb; });
  };
  add("synth-data", "synthesize and corrupt a dataset", "config");
  add("run", "run the study in a config", "config");
  add("sweep", "run a sweep study", "config");
  add("figure1", "run the three-series training-curve study", "config");
  add("replay", "re-run a finished run from its replay file", "dir");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  try {
    return dispatch(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace paddles
