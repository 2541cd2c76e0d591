#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "coinv/coinv.hpp"

namespace {

using coinv::json;

struct Overrides {
  std::string config_path;
  std::map<std::string, std::string> values;
};

void add_config_flags(CLI::App& app, Overrides& o) {
  app.add_option("-c,--config", o.config_path, "Pipeline config (JSON)");
  for (const auto& [key, _] : coinv::config_keys())
    app.add_option("--" + key, o.values[key], "Override config key '" + key + "'");
}

coinv::PipelineConfig resolve_config(const Overrides& o) {
  json j = o.config_path.empty() ? json::object() : coinv::load_json(o.config_path);
  for (const auto& [key, text] : o.values)
    if (!text.empty()) j[key] = coinv::config_value_from_string(key, text);
  return coinv::config_from_json(j);
}

std::vector<coinv::Algorithm> selected(const coinv::PipelineConfig& config, const std::string& only) {
  if (only.empty()) return config.detectors;
  return {coinv::parse_algorithm(only)};
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Co-inventor community and first-citation lag analysis"};
  app.require_subcommand(1);
  Overrides overrides;
  std::string only;

  auto* run = app.add_subcommand("run", "Run every stage");
  auto* ingest = app.add_subcommand("ingest", "Load inputs and filter the cohort");
  auto* project = app.add_subcommand("project", "Build the co-inventor graph and its LCC");
  auto* detect = app.add_subcommand("detect", "Detect communities on the LCC");
  auto* classify = app.add_subcommand("classify", "Classify first citations");
  auto* stats = app.add_subcommand("stats", "Lag histograms, fits and Welch tests");
  auto* control = app.add_subcommand("control", "Randomized-structure control");
  auto* report = app.add_subcommand("report", "Assemble summary tables");
  auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort");

  for (auto* sub : {run, ingest, project, detect, classify, stats, control, report}) add_config_flags(*sub, overrides);
  for (auto* sub : {detect, classify, stats, control})
    sub->add_option("--only", only, "Restrict to one detector");
  std::string partition_path;
  control->add_option("--partition", partition_path, "Partition file to randomize");

  std::string synth_config, synth_out;
  std::optional<std::uint64_t> synth_seed;
  std::optional<double> synth_advantage;
  synth->add_option("-c,--config", synth_config, "Synthetic cohort config (JSON)");
  synth->add_option("-o,--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", synth_seed, "Override the generator seed");
  synth->add_option("--advantage", synth_advantage, "Override the in-community lag advantage (months)");

  CLI11_PARSE(app, argc, argv);

  std::string stage = "config";
  try {
    if (synth->parsed()) {
      stage = "synth";
      coinv::SynthConfig sc;
      if (!synth_config.empty()) sc = coinv::load_json(synth_config).get<coinv::SynthConfig>();
      if (synth_seed) sc.seed = *synth_seed;
      if (synth_advantage) sc.in_community_advantage = *synth_advantage;
      auto data = coinv::generate(sc);
      coinv::write_synth(synth_out, data);
      print({{"patents", data.patents.size()},
             {"links", data.links.size()},
             {"citations", data.citations.size()},
             {"epsilon", data.epsilon}});
      return 0;
    }

    const auto config = resolve_config(overrides);
    if (run->parsed()) {
      coinv::run_pipeline(config);
      std::cout << "report written to " << config.output_dir << '\n';
      return 0;
    }
    const auto algs = selected(config, only);
    auto staged = [&](const std::string& name, auto&& f) {
      stage = name;
      print(coinv::run_stage(config, name, f));
    };
    if (ingest->parsed()) {
      coinv::check_inputs(config);
      staged("ingest", [&] { return coinv::run_ingest(config); });
    } else if (project->parsed()) {
      staged("project", [&] { return coinv::run_project(config); });
    } else if (detect->parsed()) {
      staged("detect", [&] { return coinv::run_detect(config, algs); });
    } else if (classify->parsed()) {
      staged("classify", [&] { return coinv::run_classify(config, algs); });
    } else if (stats->parsed()) {
      staged("stats", [&] { return coinv::run_stats(config, algs); });
    } else if (control->parsed()) {
      std::optional<coinv::fs::path> p;
      if (!partition_path.empty()) p = partition_path;
      staged("control", [&] { return coinv::run_control(config, algs, p); });
    } else if (report->parsed()) {
      staged("report", [&] { return coinv::run_report(config); });
    }
  } catch (const coinv::StageError& e) {
    std::cerr << "coinv: " << e.what() << '\n';
    return 1;
  } catch (const coinv::ConfigError& e) {
    std::cerr << "coinv: [config] " << e.kind() << ": " << e.what() << '\n';
    return 2;
  } catch (const coinv::Error& e) {
    std::cerr << "coinv: [" << stage << "] " << e.kind() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "coinv: [" << stage << "] " << e.what() << '\n';
    return 1;
  }
  return 0;
}
