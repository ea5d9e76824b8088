// relsum: related-work generation pipeline driver.
#include <CLI11.hpp>

#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "relsum/checksum.hpp"
#include "relsum/error.hpp"
#include "relsum/pipeline.hpp"
#include "relsum/synthetic.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string workdir;
  std::string profile;
  bool force = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--workdir", flags.workdir, "artifact directory (overrides paths.workdir)");
  cmd->add_option("--profile", flags.profile, "settings profile: full or desk");
  cmd->add_flag("--force", flags.force, "rerun even when outputs are current or the config changed");
}

relsum::PipelineConfig resolve_config(const CommonFlags& flags) {
  relsum::PipelineConfig config = relsum::profile_defaults(flags.profile);
  if (!flags.config.empty()) config = relsum::load_config(flags.config, config);
  if (!flags.workdir.empty()) config.paths.workdir = flags.workdir;
  config.validate();
  return config;
}

relsum::StageOptions stage_options(const CommonFlags& flags) {
  relsum::StageOptions options;
  options.force = flags.force;
  options.progress = [](std::string_view line) { std::cerr << line << '\n'; };
  return options;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extractive related-work generation over a bibliography graph"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string stage_name;
  for (relsum::Stage stage : relsum::kAllStages) {
    const std::string name(relsum::to_string(stage));
    auto* cmd = app.add_subcommand(name, "run the " + name + " stage");
    add_common(cmd, flags);
    cmd->callback([&stage_name, name] { stage_name = name; });
  }
  auto* pipeline = app.add_subcommand("pipeline", "run every stage in order");
  add_common(pipeline, flags);

  std::string synth_out = "data/synthetic_corpus.jsonl";
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "write the synthetic clustered corpus");
  synth->add_option("--out", synth_out, "output path");
  synth->add_option("--seed", synth_seed, "generator seed");

  auto* show = app.add_subcommand("config", "print the resolved configuration");
  add_common(show, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      relsum::SyntheticCorpusOptions options;
      options.seed = synth_seed;
      const std::filesystem::path out(synth_out);
      if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
      relsum::write_file_atomic(out, relsum::synthetic_corpus_jsonl(options));
      std::cerr << "synth: wrote " << synth_out << '\n';
      return 0;
    }
    const relsum::PipelineConfig config = resolve_config(flags);
    if (show->parsed()) {
      std::cout << relsum::config_to_json(config);
      return 0;
    }
    if (pipeline->parsed()) {
      relsum::run_pipeline(config, stage_options(flags));
      return 0;
    }
    relsum::run_stage(relsum::parse_stage(stage_name), config, stage_options(flags));
    return 0;
  } catch (const relsum::Error& e) {
    std::cerr << "error[" << relsum::to_string(e.category()) << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << '\n';
    return 1;
  }
}
