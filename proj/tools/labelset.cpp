// Command-line driver for the training-set construction pipeline.

#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "labelset/approval_service.hpp"
#include "labelset/error.hpp"
#include "labelset/pipeline.hpp"

namespace {

labelset::ApprovalService* g_service = nullptr;

void handle_signal(int) {
  if (g_service) g_service->stop();
}

std::string one_line(std::string text) {
  for (char& c : text)
    if (c == '\n' || c == '\r' || c == '\t') c = ' ';
  return text;
}

std::string format_value(const std::optional<double>& v) { return v ? std::to_string(*v) : "NA"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Construct per-label training sets from noisily tagged images"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::string workdir = ".";
  std::string log_level = "info";
  app.add_option("--seed", seed, "Master seed (overrides the config file)");
  app.add_option("--config", config_path, "INI config file")->check(CLI::ExistingFile);
  app.add_option("--workdir", workdir, "Workspace directory")->capture_default_str();
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")->capture_default_str();

  auto* ingest = app.add_subcommand("ingest", "Import a manifest into the workspace");
  std::string manifest;
  ingest->add_option("manifest", manifest, "Manifest TSV")->required()->check(CLI::ExistingFile);

  app.add_subcommand("synth", "Generate the synthetic corpus");
  app.add_subcommand("segment", "Over-segment every image");
  app.add_subcommand("features", "Extract region and global features");

  auto* construct = app.add_subcommand("construct", "Bin, cluster and open the review session for a label");
  std::string label;
  bool oracle = false;
  bool all_labels = false;
  construct->add_option("label", label, "Target label");
  construct->add_flag("--oracle", oracle, "Decide every item with the ground-truth oracle");
  construct->add_flag("--all", all_labels, "Construct every label that has candidates");

  auto* serve = app.add_subcommand("serve", "Serve the review HTTP API");
  int port = 8080;
  std::string host = "127.0.0.1";
  serve->add_option("--port", port, "Port")->capture_default_str();
  serve->add_option("--host", host, "Bind address")->capture_default_str();

  app.add_subcommand("assemble", "Assemble training sets from decided sessions");
  app.add_subcommand("annotate", "Score test images with k-NN");
  app.add_subcommand("evaluate", "AP per label and MAP of the scores");
  app.add_subcommand("report", "Constructed vs baseline comparison");

  CLI11_PARSE(app, argc, argv);

  try {
    spdlog::set_default_logger(spdlog::stderr_color_mt("labelset"));
    spdlog::set_level(spdlog::level::from_str(log_level));

    labelset::PipelineConfig config = config_path.empty() ? labelset::PipelineConfig{}
                                                          : labelset::load_config(config_path);
    if (seed) config.seed = *seed;
    const labelset::Workspace ws(workdir);
    std::filesystem::create_directories(ws.root());

    const std::string command = app.get_subcommands().front()->get_name();
    if (command == "ingest") {
      labelset::ingest(ws, manifest);
    } else if (command == "synth") {
      labelset::synthesize(ws, config);
    } else if (command == "segment") {
      labelset::segment_corpus(ws, config);
    } else if (command == "features") {
      labelset::extract_features(ws, config);
    } else if (command == "construct") {
      if (all_labels == !label.empty()) throw labelset::Error("construct needs exactly one of <label> or --all");
      labelset::Workspace::require(ws.manifest(), "ingest or synth");
      const auto labels = all_labels ? labelset::candidate_labels(labelset::load_manifest(ws.manifest()))
                                     : std::vector<std::string>{label};
      for (const auto& l : labels) {
        const auto s = labelset::construct(ws, config, l, oracle);
        std::cout << s.label << "\tcandidates=" << s.candidates << "\tbins=" << s.bins_selected
                  << "\tclusters=" << s.clusters << "\titems=" << s.items << "\tdecisions=" << s.approvals << '\n';
      }
    } else if (command == "serve") {
      labelset::ApprovalService service;
      labelset::load_sessions(ws, service);
      g_service = &service;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      if (!service.listen(host, port)) throw labelset::Error("cannot bind " + host + ":" + std::to_string(port));
      g_service = nullptr;
    } else if (command == "assemble") {
      for (const auto& s : labelset::assemble(ws, config))
        std::cout << s.label << "\tpositives=" << s.positive_ids.size() << "\tnegatives=" << s.negative_ids.size()
                  << '\n';
    } else if (command == "annotate") {
      labelset::annotate(ws, config);
    } else if (command == "evaluate") {
      std::cout << "MAP\t" << format_value(labelset::evaluate(ws).map) << '\n';
    } else if (command == "report") {
      const auto report = labelset::make_report(ws, config);
      std::cout << "MAP\tconstructed=" << format_value(report.map_constructed) << "\tbaseline=" << format_value(report.map_baseline)
                << '\n';
    }
  } catch (const labelset::MissingArtifact& e) {
    std::cerr << "error: missing-artifact: " << e.path() << ": run '" << e.producer() << "' first\n";
    return 3;
  } catch (const labelset::ParseError& e) {
    std::cerr << "error: parse: " << one_line(e.what()) << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << one_line(e.what()) << '\n';
    return 1;
  }
  return 0;
}
