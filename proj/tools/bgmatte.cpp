#include <CLI11.hpp>

#include <iostream>

#include "bgmatte/commands.hpp"
#include "bgmatte/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"bgmatte: portrait video matting with background restoration"};
  app.require_subcommand(1);

  bgmatte::CommandOptions options;
  std::string config, input, output, truth, semantic;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "config file (section.key = value)");
    cmd->add_option("--input", input, "input directory");
    cmd->add_option("--output", output, "output directory");
    cmd->add_flag("--dump-state", options.dump_state, "write restored background per frame");
    cmd->add_option("--seed", seed, "override synth.seed");
  };

  CLI::App* synth = app.add_subcommand("synth", "generate a labelled synthetic clip");
  CLI::App* matte = app.add_subcommand("matte", "matte a %06d.png frame sequence");
  CLI::App* restore = app.add_subcommand("restore-bg", "run background restoration only");
  CLI::App* eval = app.add_subcommand("eval", "score mattes against ground truth (JSON lines)");
  for (CLI::App* cmd : {synth, matte, restore, eval}) add_common(cmd);
  restore->add_option("--semantic", semantic, "directory of semantic maps (%06d.png)");
  eval->add_option("--truth", truth, "ground-truth clip or matte directory");

  CLI11_PARSE(app, argc, argv);

  CLI::App* chosen = app.get_subcommands().front();
  auto set = [](const std::string& value, auto& slot) {
    if (!value.empty()) slot = value;
  };
  set(config, options.config);
  set(input, options.input);
  set(output, options.output);
  set(truth, options.truth);
  set(semantic, options.semantic);
  if (chosen->count("--seed") > 0) options.seed = seed;

  try {
    options.threads = bgmatte::thread_count_from_env();
  } catch (const bgmatte::Error& e) {
    std::cerr << bgmatte::error_line(e) << "\n";
    return 2;
  }
  return bgmatte::run_command(chosen->get_name(), options, std::cout, std::cerr);
}
