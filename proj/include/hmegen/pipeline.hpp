#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "hmegen/decomposition.hpp"
#include "hmegen/distortion.hpp"
#include "hmegen/error.hpp"
#include "hmegen/ink_model.hpp"
#include "hmegen/inkml_io.hpp"
#include "hmegen/rasterizer.hpp"

namespace hmegen {

enum class GenerationStrategy : std::uint8_t { kNone, kDistortion, kDecomposition, kHybrid };

inline constexpr std::string_view to_string(GenerationStrategy s) {
  switch (s) {
    case GenerationStrategy::kNone: return "none";
    case GenerationStrategy::kDistortion: return "distortion";
    case GenerationStrategy::kDecomposition: return "decomposition";
    case GenerationStrategy::kHybrid: return "hybrid";
  }
  return "?";
}

inline std::optional<GenerationStrategy> parse_generation_strategy(std::string_view text) {
  for (auto s : {GenerationStrategy::kNone, GenerationStrategy::kDistortion,
                 GenerationStrategy::kDecomposition, GenerationStrategy::kHybrid})
    if (text == to_string(s)) return s;
  return std::nullopt;
}

struct StrategyConfig {
  GenerationStrategy strategy = GenerationStrategy::kHybrid;
  int copies_per_hme = 5;
  std::uint64_t master_seed = 0;
  bool include_originals = true;
  int workers = 1;
  // Number of input expressions processed per parallel batch; bounds memory.
  std::size_t batch_size = 256;

  void validate() const {
    if (copies_per_hme < 1) throw ParameterError("copies per expression must be at least 1");
    if (workers < 1) throw ParameterError("worker count must be at least 1");
    if (batch_size < 1) throw ParameterError("batch size must be at least 1");
  }
};

struct CorpusEntry {
  std::string stem;
  OnlineHME hme;
};

struct FileFailure {
  std::string name;
  std::string message;
};

struct Corpus {
  std::vector<CorpusEntry> entries;
  std::vector<FileFailure> failures;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("cannot write " + path.string());
}

/// Parses every *.inkml file under `dir` (sorted by file name, which fixes
/// each expression's stable index). Unparseable files are recorded and skipped.
inline Corpus load_corpus(const std::filesystem::path& dir, const ParseOptions& options = {}) {
  if (!std::filesystem::is_directory(dir)) throw Error(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".inkml") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  Corpus corpus;
  for (const auto& f : files) {
    try {
      OnlineHME hme = parse_inkml(read_file(f), options);
      if (hme.provenance.source.empty()) hme.provenance.source = f.filename().string();
      corpus.entries.push_back({f.stem().string(), std::move(hme)});
    } catch (const std::exception& e) {
      corpus.failures.push_back({f.string(), e.what()});
    }
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Report

inline constexpr std::size_t kAngleBins = 20;  // 1 degree each over [-10, 10]
inline constexpr std::size_t kScaleBins = 12;  // 0.05 each over [0.7, 1.3]

struct DatasetReport {
  GenerationStrategy strategy = GenerationStrategy::kNone;
  int copies_per_hme = 0;
  bool include_originals = true;
  std::size_t input_count = 0;
  std::size_t decomposition_set_count = 0;  // |D|: originals plus sub-expressions
  std::size_t generated_count = 0;
  std::size_t total_count = 0;
  std::size_t failed_count = 0;
  std::array<std::size_t, 4> rule_counts{};  // emitted sub-expressions per rule, index 1..3
  std::size_t rule4_discarded = 0;
  std::size_t duplicates_removed = 0;
  std::array<std::size_t, 5> id_histogram{};
  std::array<std::size_t, 2> axis_histogram{};
  std::array<std::size_t, kAngleBins> alpha_histogram{};
  std::array<std::size_t, kAngleBins> beta_histogram{};
  std::array<std::size_t, kAngleBins> gamma_histogram{};
  std::array<std::size_t, kScaleBins> k_histogram{};

  void record(const DistortionParams& p) {
    auto bin = [](double v, double lo, double hi, std::size_t bins) {
      const double f = (v - lo) / (hi - lo) * static_cast<double>(bins);
      return static_cast<std::size_t>(std::clamp(f, 0.0, static_cast<double>(bins - 1)));
    };
    ++id_histogram[static_cast<std::size_t>(std::clamp(p.id, 1, 5) - 1)];
    ++axis_histogram[p.axis == Axis::kHorizontal ? 0 : 1];
    ++alpha_histogram[bin(p.alpha, -kMaxAngleDegrees, kMaxAngleDegrees, kAngleBins)];
    ++beta_histogram[bin(p.beta, -kMaxAngleDegrees, kMaxAngleDegrees, kAngleBins)];
    ++gamma_histogram[bin(p.gamma, -kMaxAngleDegrees, kMaxAngleDegrees, kAngleBins)];
    ++k_histogram[bin(p.k, kMinScale, kMaxScale, kScaleBins)];
  }

  bool operator==(const DatasetReport&) const = default;
};

namespace detail {

template <std::size_t N>
std::string join_counts(const std::array<std::size_t, N>& a, std::size_t from = 0) {
  std::string out;
  for (std::size_t i = from; i < N; ++i) {
    if (i > from) out += ' ';
    out += std::to_string(a[i]);
  }
  return out;
}

template <std::size_t N>
void split_counts(const std::string& text, std::array<std::size_t, N>& a, std::size_t from = 0) {
  std::istringstream in(text);
  for (std::size_t i = from; i < N; ++i)
    if (!(in >> a[i])) throw ParseError("short histogram '" + text + "'", 0);
}

}  // namespace detail

/// "key: value" lines.
inline std::string format_report(const DatasetReport& r) {
  std::ostringstream out;
  out << "strategy: " << to_string(r.strategy) << '\n'
      << "copies_per_hme: " << r.copies_per_hme << '\n'
      << "include_originals: " << (r.include_originals ? "true" : "false") << '\n'
      << "input_count: " << r.input_count << '\n'
      << "decomposition_set_count: " << r.decomposition_set_count << '\n'
      << "generated_count: " << r.generated_count << '\n'
      << "total_count: " << r.total_count << '\n'
      << "failed_count: " << r.failed_count << '\n'
      << "rule1_count: " << r.rule_counts[1] << '\n'
      << "rule2_count: " << r.rule_counts[2] << '\n'
      << "rule3_count: " << r.rule_counts[3] << '\n'
      << "rule4_discarded: " << r.rule4_discarded << '\n'
      << "duplicates_removed: " << r.duplicates_removed << '\n'
      << "id_histogram: " << detail::join_counts(r.id_histogram) << '\n'
      << "axis_histogram: " << detail::join_counts(r.axis_histogram) << '\n'
      << "alpha_histogram: " << detail::join_counts(r.alpha_histogram) << '\n'
      << "beta_histogram: " << detail::join_counts(r.beta_histogram) << '\n'
      << "gamma_histogram: " << detail::join_counts(r.gamma_histogram) << '\n'
      << "k_histogram: " << detail::join_counts(r.k_histogram) << '\n';
  return out.str();
}

inline DatasetReport parse_report(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw ParseError("report line without ':'", 0);
    kv[line.substr(0, colon)] = detail::trim(line.substr(colon + 1));
  }
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParseError("report is missing '" + key + "'", 0);
    return it->second;
  };
  auto count = [&](const std::string& key) -> std::size_t {
    try {
      return static_cast<std::size_t>(std::stoull(get(key)));
    } catch (const std::logic_error&) {
      throw ParseError("bad count for '" + key + "'", 0);
    }
  };
  DatasetReport r;
  auto strategy = parse_generation_strategy(get("strategy"));
  if (!strategy) throw ParseError("unknown strategy '" + get("strategy") + "'", 0);
  r.strategy = *strategy;
  r.copies_per_hme = static_cast<int>(count("copies_per_hme"));
  r.include_originals = get("include_originals") == "true";
  r.input_count = count("input_count");
  r.decomposition_set_count = count("decomposition_set_count");
  r.generated_count = count("generated_count");
  r.total_count = count("total_count");
  r.failed_count = count("failed_count");
  r.rule_counts[1] = count("rule1_count");
  r.rule_counts[2] = count("rule2_count");
  r.rule_counts[3] = count("rule3_count");
  r.rule4_discarded = count("rule4_discarded");
  r.duplicates_removed = count("duplicates_removed");
  detail::split_counts(get("id_histogram"), r.id_histogram);
  detail::split_counts(get("axis_histogram"), r.axis_histogram);
  detail::split_counts(get("alpha_histogram"), r.alpha_histogram);
  detail::split_counts(get("beta_histogram"), r.beta_histogram);
  detail::split_counts(get("gamma_histogram"), r.gamma_histogram);
  detail::split_counts(get("k_histogram"), r.k_histogram);
  return r;
}

// ---------------------------------------------------------------------------
// Output sinks

struct GeneratedItem {
  std::string name;  // <source-stem>__<strategy><ordinal>
  OnlineHME hme;
};

/// Receives generated items in stable order, one call per item.
class Sink {
 public:
  virtual ~Sink() = default;
  virtual void write(const GeneratedItem& item) = 0;
  virtual void finish() {}
};

/// Keeps only manifest rows.
class ManifestSink : public Sink {
 public:
  void write(const GeneratedItem& item) override {
    rows_.push_back({"inkml/" + item.name + ".inkml", item.hme.latex});
  }
  const std::vector<ManifestRow>& rows() const { return rows_; }

 protected:
  std::vector<ManifestRow> rows_;
};

/// Keeps everything in memory.
class CollectingSink : public ManifestSink {
 public:
  void write(const GeneratedItem& item) override {
    ManifestSink::write(item);
    items_.push_back(item);
  }
  const std::vector<GeneratedItem>& items() const { return items_; }

 private:
  std::vector<GeneratedItem> items_;
};

/// Writes output_root/inkml/<name>.inkml, optionally output_root/img/<name>.pgm,
/// and on finish() the manifests: manifest.tsv (InkML paths) and, when
/// rendering, images.tsv (image paths).
class DirectorySink : public ManifestSink {
 public:
  DirectorySink(std::filesystem::path root, std::optional<RasterConfig> raster)
      : root_(std::move(root)), raster_(raster) {
    std::filesystem::create_directories(root_ / "inkml");
    if (raster_) {
      raster_->validate();
      std::filesystem::create_directories(root_ / "img");
    }
  }

  void write(const GeneratedItem& item) override {
    write_file(root_ / "inkml" / (item.name + ".inkml"), write_inkml(item.hme));
    ManifestSink::write(item);
    if (raster_) {
      const std::string rel = "img/" + item.name + ".pgm";
      write_file(root_ / rel, encode_pgm(rasterize(item.hme, *raster_)));
      image_rows_.push_back({rel, item.hme.latex});
    }
  }

  void finish() override {
    write_file(root_ / "manifest.tsv", format_manifest(rows_));
    if (raster_) write_file(root_ / "images.tsv", format_manifest(image_rows_));
  }

 private:
  std::filesystem::path root_;
  std::optional<RasterConfig> raster_;
  std::vector<ManifestRow> image_rows_;
};

// ---------------------------------------------------------------------------
// Generation

namespace detail {

struct ExpressionOutput {
  std::vector<GeneratedItem> items;
  DatasetReport partial;  // counts contributed by this one input
  std::optional<std::string> error;
};

inline void add_partial(DatasetReport& into, const DatasetReport& p) {
  into.decomposition_set_count += p.decomposition_set_count;
  into.generated_count += p.generated_count;
  into.total_count += p.total_count;
  for (std::size_t i = 0; i < into.rule_counts.size(); ++i) into.rule_counts[i] += p.rule_counts[i];
  into.rule4_discarded += p.rule4_discarded;
  into.duplicates_removed += p.duplicates_removed;
  for (std::size_t i = 0; i < 5; ++i) into.id_histogram[i] += p.id_histogram[i];
  for (std::size_t i = 0; i < 2; ++i) into.axis_histogram[i] += p.axis_histogram[i];
  for (std::size_t i = 0; i < kAngleBins; ++i) {
    into.alpha_histogram[i] += p.alpha_histogram[i];
    into.beta_histogram[i] += p.beta_histogram[i];
    into.gamma_histogram[i] += p.gamma_histogram[i];
  }
  for (std::size_t i = 0; i < kScaleBins; ++i) into.k_histogram[i] += p.k_histogram[i];
}

inline ExpressionOutput expand_one(const CorpusEntry& entry, std::size_t index,
                                   const StrategyConfig& config) {
  ExpressionOutput out;
  DatasetReport& r = out.partial;
  auto emit = [&](std::string name, OnlineHME hme, bool generated) {
    ++r.total_count;
    if (generated) ++r.generated_count;
    out.items.push_back({std::move(name), std::move(hme)});
  };

  OnlineHME original = entry.hme;
  original.provenance.strategy = Strategy::kOriginal;
  if (original.provenance.source.empty()) original.provenance.source = entry.stem;
  const std::string original_name = entry.stem + "__original0";

  // The decomposition set for this input: the original plus its sub-expressions.
  std::vector<std::pair<std::string, OnlineHME>> dset;
  dset.emplace_back(original_name, original);
  if (config.strategy == GenerationStrategy::kDecomposition ||
      config.strategy == GenerationStrategy::kHybrid) {
    DecompositionResult dec = decompose(original);
    for (std::size_t i = 0; i < dec.sub_hmes.size(); ++i) {
      ++r.rule_counts[static_cast<std::size_t>(dec.rule_trace[i].rule)];
      dset.emplace_back(entry.stem + "__decomposition" + std::to_string(i + 1),
                        std::move(dec.sub_hmes[i]));
    }
    r.rule4_discarded += dec.discarded_single_symbol;
    r.duplicates_removed += dec.duplicates;
  }
  r.decomposition_set_count = dset.size();

  switch (config.strategy) {
    case GenerationStrategy::kNone:
      emit(original_name, original, false);
      break;
    case GenerationStrategy::kDistortion: {
      if (config.include_originals) emit(original_name, original, false);
      Rng rng(config.master_seed, index, 0);
      for (int c = 1; c <= config.copies_per_hme; ++c) {
        const DistortionParams p = sample_params(rng);
        r.record(p);
        emit(entry.stem + "__distortion" + std::to_string(c), distort_hme(original, p), true);
      }
      break;
    }
    case GenerationStrategy::kDecomposition:
      for (std::size_t j = 0; j < dset.size(); ++j) {
        if (j == 0 && !config.include_originals) continue;
        emit(dset[j].first, dset[j].second, j > 0);
      }
      break;
    case GenerationStrategy::kHybrid:
      for (std::size_t j = 0; j < dset.size(); ++j) {
        if (j > 0 || config.include_originals) emit(dset[j].first, dset[j].second, j > 0);
        Rng rng(config.master_seed, index, j);
        for (int c = 1; c <= config.copies_per_hme; ++c) {
          const DistortionParams p = sample_params(rng);
          r.record(p);
          OnlineHME variant = distort_hme(dset[j].second, p);
          variant.provenance.strategy = Strategy::kHybrid;
          emit(dset[j].first + "__hybrid" + std::to_string(c), std::move(variant), true);
        }
      }
      break;
  }
  return out;
}

}  // namespace detail

/// Logger for per-file failures; defaults to silence.
using FailureLog = std::function<void(const FileFailure&)>;

/// Runs the configured strategy over the corpus and streams every output item
/// to `sink` in stable order (input index, then ordinal). Batches are expanded
/// in parallel; output does not depend on the worker count.
inline DatasetReport generate(const std::vector<CorpusEntry>& corpus, const StrategyConfig& config,
                              Sink& sink, const FailureLog& log = {}) {
  config.validate();
  DatasetReport report;
  report.strategy = config.strategy;
  report.copies_per_hme = config.strategy == GenerationStrategy::kDistortion ||
                                  config.strategy == GenerationStrategy::kHybrid
                              ? config.copies_per_hme
                              : 0;
  report.include_originals = config.include_originals;

  for (std::size_t begin = 0; begin < corpus.size(); begin += config.batch_size) {
    const std::size_t end = std::min(corpus.size(), begin + config.batch_size);
    std::vector<detail::ExpressionOutput> outputs(end - begin);
    auto work = [&](std::size_t worker) {
      for (std::size_t i = begin + worker; i < end; i += static_cast<std::size_t>(config.workers)) {
        try {
          outputs[i - begin] = detail::expand_one(corpus[i], i, config);
        } catch (const std::exception& e) {
          outputs[i - begin] = {};
          outputs[i - begin].error = e.what();
        }
      }
    };
    if (config.workers == 1) {
      work(0);
    } else {
      std::vector<std::jthread> threads;
      for (int w = 0; w < config.workers; ++w) threads.emplace_back(work, static_cast<std::size_t>(w));
    }
    for (std::size_t i = begin; i < end; ++i) {
      auto& o = outputs[i - begin];
      if (o.error) {
        ++report.failed_count;
        if (log) log({corpus[i].stem, *o.error});
        continue;
      }
      ++report.input_count;
      detail::add_partial(report, o.partial);
      for (const GeneratedItem& item : o.items) sink.write(item);
    }
  }
  sink.finish();
  return report;
}

inline DatasetReport generate_distortion_set(const std::vector<CorpusEntry>& corpus,
                                             StrategyConfig config, Sink& sink) {
  config.strategy = GenerationStrategy::kDistortion;
  return generate(corpus, config, sink);
}

inline DatasetReport generate_decomposition_set(const std::vector<CorpusEntry>& corpus,
                                                StrategyConfig config, Sink& sink) {
  config.strategy = GenerationStrategy::kDecomposition;
  return generate(corpus, config, sink);
}

inline DatasetReport generate_hybrid_set(const std::vector<CorpusEntry>& corpus,
                                         StrategyConfig config, Sink& sink) {
  config.strategy = GenerationStrategy::kHybrid;
  return generate(corpus, config, sink);
}

// ---------------------------------------------------------------------------
// Count verification

struct ExpectedCounts {
  std::optional<std::size_t> total;
  std::optional<std::size_t> generated;
  // Allowed relative deviation from the expected values (0 = exact).
  double tolerance = 0.0;
};

struct VerifyResult {
  bool ok = true;
  std::vector<std::string> details;
};

/// Checks the report's internal count identities and compares it with the
/// expected totals.
inline VerifyResult verify_counts(const DatasetReport& r, const ExpectedCounts& expected = {}) {
  VerifyResult v;
  auto check = [&v](bool good, const std::string& what) {
    v.details.push_back((good ? "ok: " : "MISMATCH: ") + what);
    if (!good) v.ok = false;
  };
  const std::size_t originals = r.include_originals ? r.input_count : 0;
  const std::size_t c = static_cast<std::size_t>(std::max(r.copies_per_hme, 0));
  check(r.total_count == r.generated_count + originals,
        "total " + std::to_string(r.total_count) + " = generated " + std::to_string(r.generated_count) +
            " + originals " + std::to_string(originals));
  switch (r.strategy) {
    case GenerationStrategy::kNone:
      check(r.generated_count == 0, "no generated items without a strategy");
      break;
    case GenerationStrategy::kDistortion: {
      const std::size_t want = r.input_count * c + originals;
      check(r.total_count == want, "distortion total " + std::to_string(r.total_count) +
                                       " = N*c + originals = " + std::to_string(want));
      break;
    }
    case GenerationStrategy::kDecomposition: {
      const std::size_t subs = r.rule_counts[1] + r.rule_counts[2] + r.rule_counts[3];
      check(r.generated_count == subs, "generated " + std::to_string(r.generated_count) +
                                           " = rule1+rule2+rule3 = " + std::to_string(subs));
      check(r.decomposition_set_count == subs + r.input_count,
            "|D| " + std::to_string(r.decomposition_set_count) + " = subs + N");
      break;
    }
    case GenerationStrategy::kHybrid: {
      const std::size_t d = r.decomposition_set_count;
      const std::size_t want = d * (c + 1) - (r.input_count - originals);
      check(r.total_count == want, "hybrid total " + std::to_string(r.total_count) +
                                       " = |D|*(c+1) = " + std::to_string(want));
      break;
    }
  }
  auto compare = [&](const char* what, std::size_t got, std::size_t want) {
    const double allowed = expected.tolerance * static_cast<double>(want);
    const double diff = std::abs(static_cast<double>(got) - static_cast<double>(want));
    check(diff <= allowed, std::string(what) + " " + std::to_string(got) + " vs expected " +
                               std::to_string(want) + " (tolerance " +
                               std::to_string(expected.tolerance * 100.0) + "%)");
  };
  if (expected.total) compare("total", r.total_count, *expected.total);
  if (expected.generated) compare("generated", r.generated_count, *expected.generated);
  return v;
}

}  // namespace hmegen
