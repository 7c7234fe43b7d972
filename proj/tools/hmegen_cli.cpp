// hmegen: generate augmented handwritten-math datasets from InkML corpora.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#if __has_include("CLI11.hpp")
#include "CLI11.hpp"
#else
#include <CLI/CLI.hpp>
#endif
#include "hmegen/hmegen.hpp"

namespace fs = std::filesystem;
using namespace hmegen;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct RasterOptions {
  RasterConfig config;
  void add_to(CLI::App& cmd) {
    cmd.add_option("--height", config.target_height, "Image height in pixels")->capture_default_str();
    cmd.add_option("--max-width", config.max_width, "Maximum image width in pixels")->capture_default_str();
    cmd.add_option("--thickness", config.thickness, "Stroke thickness in pixels")->capture_default_str();
    cmd.add_option("--margin", config.margin, "Margin in pixels")->capture_default_str();
  }
};

std::string default_output_root() {
  if (const char* env = std::getenv("HMEGEN_OUTPUT_ROOT"); env && *env) return env;
  return "hmegen_out";
}

void log_failure(const FileFailure& f) { std::cerr << "failed: " << f.name << ": " << f.message << '\n'; }

int run_generate(const fs::path& input, const fs::path& output, const StrategyConfig& config,
                 bool images, bool no_truth, const RasterConfig& raster, bool dry_run) {
  Corpus corpus = load_corpus(input, ParseOptions{no_truth});
  for (const FileFailure& f : corpus.failures) log_failure(f);

  DatasetReport report;
  if (dry_run) {
    ManifestSink sink;
    report = generate(corpus.entries, config, sink, log_failure);
  } else {
    DirectorySink sink(output, images ? std::optional<RasterConfig>(raster) : std::nullopt);
    report = generate(corpus.entries, config, sink, log_failure);
  }
  report.failed_count += corpus.failures.size();
  const std::string text = format_report(report);
  if (!dry_run) write_file(output / "report.txt", text);
  std::cout << text;
  return report.failed_count == 0 ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pattern generation for handwritten mathematical expressions"};
  app.require_subcommand(1);

  // generate / stats share the strategy options.
  StrategyConfig config;
  std::string strategy_name = "hybrid";
  fs::path input;
  fs::path output = default_output_root();
  bool no_originals = false;
  bool no_images = false;
  bool no_truth = false;
  RasterOptions raster;

  auto add_strategy_options = [&](CLI::App* cmd) {
    cmd->add_option("--input,-i", input, "Directory of InkML files")->required();
    cmd->add_option("--strategy,-s", strategy_name, "none | distortion | decomposition | hybrid")
        ->check(CLI::IsMember({"none", "distortion", "decomposition", "hybrid"}))
        ->capture_default_str();
    cmd->add_option("--seed", config.master_seed, "Master random seed")->capture_default_str();
    cmd->add_option("--copies,-c", config.copies_per_hme, "Distorted copies per expression")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--workers,-j", config.workers, "Parallel workers")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_flag("--no-originals", no_originals, "Leave the input expressions out of the output");
    cmd->add_flag("--no-truth", no_truth, "Accept files without ground truth");
  };

  auto* generate_cmd = app.add_subcommand("generate", "Generate a dataset from a corpus");
  add_strategy_options(generate_cmd);
  generate_cmd->add_option("--output,-o", output, "Output root (default $HMEGEN_OUTPUT_ROOT)")
      ->capture_default_str();
  generate_cmd->add_flag("--no-images", no_images, "Skip rasterization");
  raster.add_to(*generate_cmd);

  auto* stats_cmd = app.add_subcommand("stats", "Print the dataset report without writing files");
  add_strategy_options(stats_cmd);

  fs::path file;
  auto* decompose_cmd = app.add_subcommand("decompose", "Print the sub-expressions of one file");
  decompose_cmd->add_option("file", file, "InkML file")->required()->check(CLI::ExistingFile);
  bool show_rules = false;
  decompose_cmd->add_flag("--rules", show_rules, "Prefix each line with the rule that produced it");
  std::optional<fs::path> decompose_out;
  decompose_cmd->add_option("--output,-o", decompose_out, "Also write each sub-expression as InkML here");

  auto* distort_cmd = app.add_subcommand("distort", "Distort one file with explicit parameters");
  distort_cmd->add_option("file", file, "InkML file")->required()->check(CLI::ExistingFile);
  DistortionParams params;
  std::string axis_name = "horizontal";
  distort_cmd->add_option("--id", params.id, "Local model 1..5")->check(CLI::Range(1, 5))->required();
  distort_cmd->add_option("--axis", axis_name, "horizontal | vertical")
      ->check(CLI::IsMember({"horizontal", "vertical", "h", "v"}))
      ->capture_default_str();
  distort_cmd->add_option("--alpha", params.alpha, "Local angle (degrees)")->capture_default_str();
  distort_cmd->add_option("--beta", params.beta, "Local rotation (degrees)")->capture_default_str();
  distort_cmd->add_option("--k", params.k, "Global scale")->capture_default_str();
  distort_cmd->add_option("--gamma", params.gamma, "Global rotation (degrees)")->capture_default_str();
  std::optional<fs::path> distort_out;
  distort_cmd->add_option("--output,-o", distort_out, "Output InkML file (default stdout)");

  auto* rasterize_cmd = app.add_subcommand("rasterize", "Render InkML files to PGM images");
  rasterize_cmd->add_option("input", input, "InkML file or directory")->required()->check(CLI::ExistingPath);
  rasterize_cmd->add_option("--output,-o", output, "Output directory")->capture_default_str();
  rasterize_cmd->add_flag("--no-truth", no_truth, "Accept files without ground truth");
  raster.add_to(*rasterize_cmd);

  auto* verify_cmd = app.add_subcommand("verify", "Check a report's count identities");
  fs::path report_path;
  std::optional<std::size_t> expected_total;
  std::optional<std::size_t> expected_generated;
  double tolerance = 0.0;
  verify_cmd->add_option("report", report_path, "report.txt from generate")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--expected-total", expected_total, "Expected total count");
  verify_cmd->add_option("--expected-generated", expected_generated, "Expected generated count");
  verify_cmd->add_option("--tolerance", tolerance, "Relative tolerance (0.05 = 5%)")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  config.strategy = *parse_generation_strategy(strategy_name);
  config.include_originals = !no_originals;

  try {
    if (*generate_cmd)
      return run_generate(input, output, config, !no_images, no_truth, raster.config, false);
    if (*stats_cmd) return run_generate(input, output, config, false, no_truth, raster.config, true);

    if (*decompose_cmd) {
      const OnlineHME hme = parse_inkml(read_file(file));
      DecompositionResult result = decompose(hme);
      if (decompose_out) fs::create_directories(*decompose_out);
      for (std::size_t i = 0; i < result.sub_hmes.size(); ++i) {
        if (show_rules) std::cout << "rule" << result.rule_trace[i].rule << '\t';
        std::cout << result.sub_hmes[i].latex << '\n';
        if (decompose_out) {
          result.sub_hmes[i].provenance.source = file.filename().string();
          write_file(*decompose_out / (file.stem().string() + "__decomposition" + std::to_string(i + 1) + ".inkml"),
                     write_inkml(result.sub_hmes[i]));
        }
      }
      return kExitOk;
    }

    if (*distort_cmd) {
      params.axis = *parse_axis(axis_name);
      OnlineHME hme = parse_inkml(read_file(file));
      if (hme.provenance.source.empty()) hme.provenance.source = file.filename().string();
      const std::string text = write_inkml(distort_hme(hme, params));
      if (distort_out) write_file(*distort_out, text);
      else std::cout << text;
      return kExitOk;
    }

    if (*rasterize_cmd) {
      raster.config.validate();
      std::vector<fs::path> files;
      if (fs::is_directory(input)) {
        for (const auto& e : fs::recursive_directory_iterator(input))
          if (e.is_regular_file() && e.path().extension() == ".inkml") files.push_back(e.path());
        std::sort(files.begin(), files.end());
      } else {
        files.push_back(input);
      }
      fs::create_directories(output);
      std::vector<ManifestRow> rows;
      int failures = 0;
      for (const fs::path& f : files) {
        try {
          const OnlineHME hme = parse_inkml(read_file(f), ParseOptions{no_truth});
          const std::string name = f.stem().string() + ".pgm";
          write_file(output / name, encode_pgm(rasterize(hme, raster.config)));
          rows.push_back({name, hme.latex});
        } catch (const std::exception& e) {
          log_failure({f.string(), e.what()});
          ++failures;
        }
      }
      write_file(output / "images.tsv", format_manifest(rows));
      return failures == 0 ? kExitOk : kExitFailure;
    }

    if (*verify_cmd) {
      const DatasetReport report = parse_report(read_file(report_path));
      const VerifyResult result =
          verify_counts(report, ExpectedCounts{expected_total, expected_generated, tolerance});
      for (const std::string& line : result.details) std::cout << line << '\n';
      std::cout << (result.ok ? "PASS" : "FAIL") << '\n';
      return result.ok ? kExitOk : kExitFailure;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
