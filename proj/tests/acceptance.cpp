// Acceptance suite: one PASS/FAIL/SKIP line per criterion; exit status is
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

#include "support.hpp"

using namespace hmegen;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  enum Kind { kPass, kFail, kSkip } kind = kPass;
  std::string detail;
};

class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  Outcome outcome(const std::string& summary) const {
    if (failed_ == 0) return {Outcome::kPass, summary};
    std::string d = std::to_string(failed_) + " check(s) failed:";
    for (const auto& f : failures_) d += " [" + f + "]";
    return {Outcome::kFail, d};
  }

 private:
  std::vector<std::string> failures_;
  std::size_t failed_ = 0;
};

class CountingSink : public Sink {
 public:
  void write(const GeneratedItem&) override { ++count; }
  std::size_t count = 0;
};

std::string set_text(const std::set<std::string>& s) {
  std::string out = "{";
  for (const auto& x : s) out += (out.size() > 1 ? ", " : "") + x;
  return out + "}";
}

OnlineHME random_hme(fixture::ExprGenerator& gen, int depth = 2) {
  const fixture::Expr e = gen.expression(depth);
  return parse_inkml(fixture::inkml(e.truth, fixture::scatter(e.labels, gen)));
}

Outcome fig5_decomposition() {
  const auto start = std::chrono::steady_clock::now();
  const DecompositionResult r = decompose(fixture::fig5());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::set<std::string> got;
  for (const auto& h : r.sub_hmes) got.insert(h.latex);
  const std::set<std::string> want{"x + 2 x + 1", "x ^ { 2 }", "2 x + 1", "x ^ { 2 } + 2 x"};
  Checker c;
  c.expect(got == want && r.sub_hmes.size() == 4, "got " + set_text(got));
  c.expect(r.discarded_single_symbol == 2, "discarded " + std::to_string(r.discarded_single_symbol));
  c.expect(secs < 1.0, "took " + std::to_string(secs) + " s");
  return c.outcome(set_text(got) + ", 2 single-symbol results discarded");
}

Outcome table_counts() {
  Checker c;
  StrategyConfig config;
  config.copies_per_hme = 5;
  config.master_seed = 2019;
  const OnlineHME stub = fixture::hme("x", {"x"});

  config.strategy = GenerationStrategy::kDistortion;
  CountingSink a;
  const DatasetReport d = generate(std::vector<CorpusEntry>(8835, {"stub", stub}), config, a);
  c.expect(d.total_count == 53010 && a.count == 53010, "distortion total " + std::to_string(d.total_count));
  c.expect(verify_counts(d, {53010, std::nullopt, 0}).ok, "distortion verify_counts");

  config.strategy = GenerationStrategy::kHybrid;
  CountingSink b;
  const DatasetReport h = generate(std::vector<CorpusEntry>(32884, {"stub", stub}), config, b);
  c.expect(h.decomposition_set_count == 32884, "|D| " + std::to_string(h.decomposition_set_count));
  c.expect(h.total_count == 197304 && b.count == 197304, "hybrid total " + std::to_string(h.total_count));
  c.expect(verify_counts(h, {197304, std::nullopt, 0}).ok, "hybrid verify_counts");
  return c.outcome("distortion " + std::to_string(d.total_count) + ", hybrid " + std::to_string(h.total_count));
}

Outcome identity_suite() {
  Checker c;
  fixture::ExprGenerator gen(303);
  double worst_identity = 0, worst_rotation = 0, worst_scale = 0;
  for (int i = 0; i < 100; ++i) {
    const OnlineHME h = random_hme(gen);
    const OnlineHME d = distort_hme(h, {1, Axis::kHorizontal, 0, 0, 1, 0});
    for (std::size_t s = 0; s < h.strokes.size(); ++s)
      for (std::size_t p = 0; p < h.strokes[s].points.size(); ++p)
        worst_identity = std::max({worst_identity, std::abs(d.strokes[s].points[p].x - h.strokes[s].points[p].x),
                                   std::abs(d.strokes[s].points[p].y - h.strokes[s].points[p].y)});

    std::vector<PenPoint> pts;
    for (const Stroke& s : h.strokes) pts.insert(pts.end(), s.points.begin(), s.points.end());
    const PenPoint pivot{gen.uniform(-100, 100), gen.uniform(-100, 100)};
    const double angle = gen.uniform(-10, 10);
    const auto r = apply_rotation(pts, angle, pivot);
    for (std::size_t p = 0; p < pts.size(); ++p)
      worst_rotation = std::max(worst_rotation, std::abs(std::hypot(r[p].x - pivot.x, r[p].y - pivot.y) -
                                                         std::hypot(pts[p].x - pivot.x, pts[p].y - pivot.y)));

    const double k = gen.uniform(kMinScale, kMaxScale);
    const auto scaled = apply_scaling(pts, k, pivot);
    const double before = bounding_box(std::span<const PenPoint>(pts)).diagonal();
    const double after = bounding_box(std::span<const PenPoint>(scaled)).diagonal();
    worst_scale = std::max(worst_scale, std::abs(after - k * before));
  }
  c.expect(worst_identity <= 1e-9, "identity error " + std::to_string(worst_identity));
  c.expect(worst_rotation <= 1e-9, "rotation distance error " + std::to_string(worst_rotation));
  c.expect(worst_scale <= 1e-6, "scaling diagonal error " + std::to_string(worst_scale));
  std::ostringstream s;
  s << "max errors: identity " << worst_identity << ", rotation " << worst_rotation << ", scaling " << worst_scale;
  return c.outcome(s.str());
}

Outcome formula_checks() {
  Checker c;
  const double a = 10.0 * std::numbers::pi / 180.0;
  auto near = [&](double got, double want, double lit, const std::string& what) {
    c.expect(std::abs(got - want) <= 1e-3 && std::abs(got - lit) <= 1e-3,
             what + " = " + std::to_string(got) + ", expected " + std::to_string(want));
  };
  const PenPoint shear = apply_shear(std::vector<PenPoint>{{10, 20}}, Axis::kHorizontal, 10)[0];
  near(shear.x, 10 + 20 * std::tan(a), 13.5265, "shear x");
  near(shear.y, 20, 20, "shear y");
  const PenPoint shrink = apply_shrink(std::vector<PenPoint>{{40, 60}}, Axis::kVertical, 10)[0];
  near(shrink.x, 40 * (std::cos(a) - 60 * std::sin(a) / 100), 35.2248, "shrink x");
  near(shrink.y, 60, 60, "shrink y");
  const PenPoint persp = apply_perspective(std::vector<PenPoint>{{50, 0}}, Axis::kVertical, 0)[0];
  near(persp.x, 2.0 / 3.0 * (50 + 50), 66.6667, "perspective x");
  near(persp.y, 0, 0, "perspective y");
  const PenPoint scale = apply_scaling(std::vector<PenPoint>{{2, 3}}, 0.7, {0, 0})[0];
  near(scale.x, 2 * 0.7, 1.4, "scaling x");
  near(scale.y, 3 * 0.7, 2.1, "scaling y");
  std::ostringstream s;
  s << "shear (" << shear.x << ", " << shear.y << "), shrink (" << shrink.x << ", " << shrink.y
    << "), perspective (" << persp.x << ", " << persp.y << "), scaling (" << scale.x << ", " << scale.y << ")";
  return c.outcome(s.str());
}

Outcome parameter_ranges() {
  Checker c;
  Rng rng(555);
  std::array<int, 5> ids{};
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const DistortionParams p = sample_params(rng);
    c.expect(in_sampling_range(p), "sample " + std::to_string(i) + " out of range");
    if (p.id >= 1 && p.id <= 5) ++ids[static_cast<std::size_t>(p.id - 1)];
  }
  std::string freq;
  for (int k = 0; k < 5; ++k) {
    const double f = static_cast<double>(ids[static_cast<std::size_t>(k)]) / n;
    c.expect(f >= 0.18 && f <= 0.22, "id " + std::to_string(k + 1) + " frequency " + std::to_string(f));
    freq += (k ? " " : "") + std::to_string(f).substr(0, 6);
  }
  return c.outcome("10000 samples in range; id frequencies " + freq);
}

Outcome raster_contract() {
  Checker c;
  OnlineHME line;
  line.strokes = {{{{0, 0}, {10, 0}}}};
  line.symbols = {{"s0", "-", {0}}};
  line.srt.add_node("-", 0);
  const Image img = rasterize(line);
  std::set<int> rows;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      if (img.is_ink(x, y)) rows.insert(y);
  c.expect(rows.size() == 3, "horizontal stroke has " + std::to_string(rows.size()) + " ink rows");

  const RasterConfig small{48, 64, 3, 4};
  const double limit = small.thickness / 2.0 + 0.71;
  fixture::ExprGenerator gen(66);
  double worst = 0;
  for (int i = 0; i < 40; ++i) {
    const OnlineHME h = random_hme(gen, 1);
    const Image im = rasterize(h, small);
    c.expect(im.width <= 64 && im.height <= 64, "image larger than 64x64");
    const RasterTransform t = raster_transform(bounding_box(std::span<const Stroke>(h.strokes)), small);
    std::vector<std::vector<PenPoint>> polylines;
    for (const Stroke& s : h.strokes) {
      polylines.emplace_back();
      for (const PenPoint& p : s.points) polylines.back().push_back(t.apply(p));
    }
    worst = std::max(worst, fixture::worst_ink_distance(im, polylines));
  }
  c.expect(worst <= limit, "ink pixel at distance " + std::to_string(worst));
  std::ostringstream s;
  s << "3 ink rows; worst ink distance " << worst << " <= " << limit << " on 40 images";
  return c.outcome(s.str());
}

Outcome round_trip() {
  Checker c;
  fixture::ExprGenerator gen(707);
  std::size_t fixpoints = 0;
  for (int i = 0; i < 50; ++i) {
    const fixture::Expr e = gen.expression(i % 3 + 1);
    const OnlineHME a = parse_inkml(fixture::inkml(e.truth, fixture::scatter(e.labels, gen)));
    const OnlineHME b = parse_inkml(write_inkml(a));
    const std::string tag = "fixture " + std::to_string(i) + " (" + e.truth + ")";
    c.expect(a.latex == e.canonical, tag + " latex " + a.latex);
    bool strokes_ok = a.strokes.size() == b.strokes.size();
    for (std::size_t s = 0; strokes_ok && s < a.strokes.size(); ++s) {
      strokes_ok = a.strokes[s].points.size() == b.strokes[s].points.size();
      for (std::size_t p = 0; strokes_ok && p < a.strokes[s].points.size(); ++p)
        strokes_ok = std::abs(a.strokes[s].points[p].x - b.strokes[s].points[p].x) <= 1e-6 &&
                     std::abs(a.strokes[s].points[p].y - b.strokes[s].points[p].y) <= 1e-6;
    }
    c.expect(strokes_ok, tag + " strokes");
    bool labels_ok = a.symbols.size() == b.symbols.size();
    for (std::size_t s = 0; labels_ok && s < a.symbols.size(); ++s)
      labels_ok = a.symbols[s].label == b.symbols[s].label && a.symbols[s].strokes == b.symbols[s].strokes;
    c.expect(labels_ok, tag + " labels");
    c.expect(a.srt == b.srt, tag + " tree shape");
    c.expect(a.latex == b.latex, tag + " latex after round trip");

    std::vector<OnlineHME> emitted{a};
    for (OnlineHME& sub : decompose(a).sub_hmes) emitted.push_back(std::move(sub));
    for (const OnlineHME& h : emitted) {
      c.expect(latex_of(build_srt(h.symbols, h.latex)) == h.latex, tag + " fixpoint " + h.latex);
      ++fixpoints;
    }
  }
  return c.outcome("50 fixtures stable; " + std::to_string(fixpoints) + " latex fixpoints");
}

struct RunOutput {
  std::vector<std::pair<std::string, std::string>> files;  // relative path, bytes
};

RunOutput collect(const fs::path& root) {
  RunOutput out;
  std::vector<fs::path> paths;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) paths.push_back(e.path());
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) out.files.emplace_back(fs::relative(p, root).string(), read_file(p));
  return out;
}

Outcome determinism() {
  Checker c;
  const auto start = std::chrono::steady_clock::now();
  const fs::path base = fs::temp_directory_path() / "hmegen_acceptance";
  fs::remove_all(base);
  fs::create_directories(base / "corpus");
  fixture::ExprGenerator gen(808);
  for (int i = 0; i < 100; ++i) {
    const fixture::Expr e = gen.expression(i % 3 + 1);
    char name[32];
    std::snprintf(name, sizeof name, "expr%03d.inkml", i);
    write_file(base / "corpus" / name, fixture::inkml(e.truth, fixture::scatter(e.labels, gen)));
  }

  std::vector<RunOutput> runs;
  for (int workers : {1, 1, 4}) {
    const Corpus corpus = load_corpus(base / "corpus");
    c.expect(corpus.entries.size() == 100 && corpus.failures.empty(), "corpus did not load cleanly");
    StrategyConfig config;
    config.strategy = GenerationStrategy::kHybrid;
    config.master_seed = 7;
    config.workers = workers;
    config.batch_size = 16;
    const fs::path out = base / ("run" + std::to_string(runs.size()));
    DirectorySink sink(out, RasterConfig{});
    generate(corpus.entries, config, sink);
    runs.push_back(collect(out));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto manifest = [](const RunOutput& r) {
    for (const auto& [path, bytes] : r.files)
      if (path == "manifest.tsv") return bytes;
    return std::string();
  };
  c.expect(!manifest(runs[0]).empty(), "no manifest written");
  c.expect(manifest(runs[0]) == manifest(runs[1]), "manifests differ between identical runs");
  c.expect(manifest(runs[0]) == manifest(runs[2]), "manifests differ with parallel workers");
  c.expect(runs[0].files == runs[1].files, "output files differ between identical runs");
  c.expect(runs[0].files == runs[2].files, "output files differ with parallel workers");
  c.expect(secs < 60.0, "took " + std::to_string(secs) + " s");
  const std::size_t files = runs[0].files.size();
  fs::remove_all(base);
  std::ostringstream s;
  s << "3 runs x " << files << " files byte-identical (1, 1 and 4 workers) in " << std::fixed
    << std::setprecision(1) << secs << " s";
  return c.outcome(s.str());
}

Outcome crohme_decomposition() {
  const char* dir = std::getenv("HMEGEN_CROHME_DIR");
  if (!dir || !*dir) return {Outcome::kSkip, "set HMEGEN_CROHME_DIR to a CROHME training directory to run"};
  Checker c;
  const Corpus corpus = load_corpus(dir);
  StrategyConfig config;
  config.strategy = GenerationStrategy::kDecomposition;
  CountingSink sink;
  const DatasetReport r = generate(corpus.entries, config, sink);
  const VerifyResult v = verify_counts(r, {std::nullopt, 24049, 0.05});
  c.expect(v.ok, "generated " + std::to_string(r.generated_count) + " vs 24049 +-5%");
  return c.outcome(std::to_string(corpus.entries.size()) + " files (" + std::to_string(corpus.failures.size()) +
                   " unreadable), generated " + std::to_string(r.generated_count));
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"decomposition of x^2+2x+1", fig5_decomposition},
      {"dataset count arithmetic", table_counts},
      {"distortion identities", identity_suite},
      {"distortion formula point checks", formula_checks},
      {"parameter sampling ranges", parameter_ranges},
      {"raster contract", raster_contract},
      {"InkML round trip and latex fixpoint", round_trip},
      {"hybrid run determinism", determinism},
      {"decomposition count on a real corpus", crohme_decomposition},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {Outcome::kFail, std::string("exception: ") + e.what()};
    }
    const char* status = o.kind == Outcome::kPass ? "PASS" : o.kind == Outcome::kFail ? "FAIL" : "SKIP";
    if (o.kind == Outcome::kFail) ++failed;
    std::cout << status << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail << std::endl;
  }
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
