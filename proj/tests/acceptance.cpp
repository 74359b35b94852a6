// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <regex>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "oracles.hpp"
#include "thermoprint/features.hpp"
#include "thermoprint/minutiae.hpp"
#include "thermoprint/pgm.hpp"
#include "thermoprint/pipeline.hpp"
#include "thermoprint/segmentation.hpp"
#include "thermoprint/synth.hpp"

using namespace thermoprint;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

const fs::path kRunDir = fs::absolute("acceptance_run");

Outcome fig7_exactness() {
  const bool a = classify_pixel({0, 0, 1, 0, 1, 0, 0, 0, 0}) == PixelClass::termination;
  const bool b = classify_pixel({1, 1, 0, 1, 1, 0, 0, 0, 0}) == PixelClass::bifurcation;
  const bool c = classify_pixel({0, 1, 0, 0, 1, 1, 0, 0, 0}) == PixelClass::normal;
  int mismatches = 0;
  for (unsigned bits = 0; bits < 512; ++bits) {
    Window3x3 w{};
    for (std::size_t i = 0; i < 9; ++i) w[i] = static_cast<std::uint8_t>((bits >> i) & 1u);
    if (classify_pixel(w) != oracle::classify_by_rule(w)) ++mismatches;
  }
  return {a && b && c && mismatches == 0,
          std::string("termination window ") + (a ? "ok" : "wrong") + ", bifurcation window " +
              (b ? "ok" : "wrong") + ", normal window " + (c ? "ok" : "wrong") + ", " +
              std::to_string(mismatches) + "/512 table mismatches"};
}

Outcome flood_fill_equivalence() {
  int bad = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const double density = 0.2 + 0.5 * static_cast<double>(seed % 7) / 6.0;
    const auto img = oracle::random_binary(64, 64, density, seed);
    const auto lbl = label_components_8(img);
    const auto ref = oracle::flood_fill_8(img);
    bool same = lbl.component_sizes == ref.sizes;
    for (std::size_t i = 0; same && i < img.size(); ++i) same = lbl.labels[i] == ref.labels[i];
    if (!same) ++bad;
  }
  return {bad == 0, std::to_string(200 - bad) + "/200 images match"};
}

Outcome erosion_laws() {
  int oracle_bad = 0, law_bad = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto img = oracle::random_binary(32, 32, 0.55 + 0.4 * (seed % 5) / 4.0, seed);
    for (auto se : {StructuringElement::cross3, StructuringElement::square3}) {
      if (erode(img, se, 1) != oracle::erode_by_definition(img, se, 1)) ++oracle_bad;
    }
    const auto a = oracle::random_binary(32, 32, 0.6, seed + 50000);
    BinaryImage b = a;
    const auto extra = oracle::random_binary(32, 32, 0.4, seed + 90000);
    for (int r = 0; r < 32; ++r) {
      for (int c = 0; c < 32; ++c) {
        if (extra(r, c)) b.set(r, c, 1);
      }
    }
    for (auto se : {StructuringElement::cross3, StructuringElement::square3}) {
      const auto ea = erode(a, se, 1);
      if (!is_subset(ea, a) || !is_subset(ea, erode(b, se, 1))) ++law_bad;
    }
  }
  return {oracle_bad == 0 && law_bad == 0,
          std::to_string(oracle_bad) + " oracle mismatches, " + std::to_string(law_bad) +
              " law violations"};
}

Outcome skeleton_invariants() {
  std::vector<std::pair<std::string, BinaryImage>> shapes{
      {"bar", oracle::solid_bar(2, 3, 20)},
      {"disk", oracle::disk(31, 10)},
      {"Y", oracle::thick_y(48, 3.5)}};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    shapes.emplace_back("blob" + std::to_string(seed), oracle::random_blobs(64, 64, seed));
  }
  int bad = 0;
  std::string first_bad;
  for (const auto& [name, img] : shapes) {
    const auto skel = medial_axis(img);
    const bool ok = is_subset(skel, img) &&
                    label_components_8(skel).component_count() == oracle::component_count(img) &&
                    count_full_2x2_blocks(skel) == 0;
    if (!ok && bad++ == 0) first_bad = name;
  }
  return {bad == 0, std::to_string(shapes.size() - static_cast<std::size_t>(bad)) + "/" +
                        std::to_string(shapes.size()) + " shapes satisfy all invariants" +
                        (bad ? " (first failure " + first_bad + ")" : "")};
}

Outcome gradient_check() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = make_random_model(default_topology(64), 0.1, seed + 1000);
    SplitMix64 rng(seed);
    std::vector<double> x(64);
    for (auto& v : x) v = rng.unit();
    const auto t = encode_target(static_cast<int>(seed % 6), 6);
    const auto g = backward(m, x, t);
    const auto fd = oracle::finite_difference_gradients(m, x, t, 1e-5);
    for (std::size_t k = 0; k < 4; ++k) {
      for (auto [a, n] : {std::pair{&g.weights[k], &fd.weights[k]},
                          std::pair{&g.biases[k], &fd.biases[k]}}) {
        for (std::size_t i = 0; i < a->size(); ++i) {
          const double scale = std::max(std::abs((*a)[i]), std::abs((*n)[i]));
          if (scale > 0) worst = std::max(worst, std::abs((*a)[i] - (*n)[i]) / scale);
        }
      }
    }
  }
  return {worst < 1e-5, "max relative error " + fmt("%.3e", worst) + " (limit 1e-05)"};
}

Outcome determinism() {
  const auto a = kRunDir / "det_a";
  const auto b = kRunDir / "det_b";
  fs::remove_all(a);
  fs::remove_all(b);
  const auto ea = generate_dataset(2, 4, 1, a);
  const auto eb = generate_dataset(2, 4, 1, b);
  bool synth_same = ea == eb && slurp(a / kManifestName) == slurp(b / kManifestName);
  for (const auto& e : ea) {
    synth_same = synth_same && slurp(a / e.filename) == slurp(b / e.filename);
  }

  std::vector<FeatureVector> data;
  SplitMix64 rng(99);
  for (int i = 0; i < 60; ++i) {
    FeatureVector fv{8, std::vector<std::uint32_t>(64), i % 6};
    for (auto& c : fv.counts) c = static_cast<std::uint32_t>(rng.below(4));
    data.push_back(fv);
  }
  const auto s1 = split_dataset(data, 0.5, 7);
  const auto s2 = split_dataset(data, 0.5, 7);
  const bool split_same = s1.train == s2.train && s1.test == s2.test;

  TrainConfig cfg;
  cfg.epochs = 100;
  const auto t1 = train(s1.train, cfg);
  const auto t2 = train(s2.train, cfg);
  std::ostringstream m1, m2;
  save_model(m1, t1.model);
  save_model(m2, t2.model);
  const bool train_same = t1.model == t2.model && t1.loss_history == t2.loss_history &&
                          m1.str() == m2.str();
  fs::remove_all(a);
  fs::remove_all(b);
  return {synth_same && split_same && train_same,
          std::string("synth ") + (synth_same ? "identical" : "DIFFERS") + ", split " +
              (split_same ? "identical" : "DIFFERS") + ", train " +
              (train_same ? "identical" : "DIFFERS")};
}

Outcome end_to_end() {
  const auto data = kRunDir / "data";
  fs::remove_all(data);
  const auto s = data.string();
  auto step = [](const CliRun& r, const char* what) {
    if (r.code != 0) {
      throw std::runtime_error(std::string(what) + " exited " + std::to_string(r.code) + ": " +
                               r.err);
    }
  };
  try {
    step(cli_run({"synth", "-n", "6", "-k", "34", "--seed", "1", "-o", s}), "synth");
    step(cli_run({"features", s + "/manifest.csv", "--grid", "8", "-o", s + "/features.csv"}),
         "features");
    step(cli_run({"split", s + "/features.csv", "--seed", "7", "--train-out", s + "/train.csv",
                  "--test-out", s + "/test.csv"}),
         "split");
    step(cli_run({"train", s + "/train.csv", "-o", s + "/model.txt"}), "train");
    const auto test = cli_run({"evaluate", s + "/model.txt", s + "/test.csv"});
    step(test, "evaluate");
    const auto self = cli_run({"evaluate", s + "/model.txt", s + "/train.csv"});
    step(self, "evaluate (train)");
    const std::regex acc(R"(accuracy (\d+\.\d\d)%)");
    std::smatch mt, ms;
    if (!std::regex_search(test.out, mt, acc) || !std::regex_search(self.out, ms, acc)) {
      return {false, "could not parse evaluate output"};
    }
    const double test_acc = std::stod(mt[1]);
    const double train_acc = std::stod(ms[1]);

    const auto sweep = cli_run({"evaluate", "--sweep", s + "/manifest.csv"});
    step(sweep, "evaluate --sweep");
    const std::regex row(R"((\d+)x(\d+)\s+(\d+\.\d\d)%)");
    std::vector<std::string> rows;
    for (auto it = std::sregex_iterator(sweep.out.begin(), sweep.out.end(), row);
         it != std::sregex_iterator(); ++it) {
      rows.push_back((*it)[1].str() + "x" + (*it)[2].str() + " " + (*it)[3].str() + "%");
    }
    const bool three_rows = rows.size() == 3 && rows[0].rfind("8x8", 0) == 0 &&
                            rows[1].rfind("16x16", 0) == 0 && rows[2].rfind("32x32", 0) == 0;
    std::string table;
    for (const auto& r : rows) table += (table.empty() ? "" : ", ") + r;
    return {test_acc >= 90.0 && train_acc >= test_acc && three_rows,
            "test accuracy " + fmt("%.2f", test_acc) + "% (limit 90%), train " +
                fmt("%.2f", train_acc) + "%, sweep rows [" + table + "]"};
  } catch (const std::exception& e) {
    return {false, e.what()};
  }
}

Outcome throughput() {
  const auto sample = generate_sample(identity_spec(1, 0), 0);
  const auto path = kRunDir / "throughput.pgm";
  save_pgm(path, sample.image);
  const PipelineConfig cfg;
  double worst = 0.0;
  std::size_t points = 0;
  for (int rep = 0; rep < 3; ++rep) {
    const auto start = Clock::now();
    const auto img = load_pgm(path);
    const auto analysis = analyze_image(img, cfg);
    const auto fv = features_for(analysis, cfg.grid);
    worst = std::max(worst, seconds_since(start));
    points = fv.total();
  }
  fs::remove(path);
  return {worst < 1.0, std::to_string(sample.image.width()) + "x" +
                           std::to_string(sample.image.height()) + " image, " +
                           std::to_string(points) + " minutiae, slowest of 3 runs " +
                           fmt("%.3f", worst) + " s (limit 1 s)"};
}

Outcome conservation() {
  const auto manifest = kRunDir / "data" / kManifestName;
  if (!fs::exists(manifest)) return {false, "end-to-end dataset missing"};
  const auto batch = extract_batch(load_manifest(manifest), manifest.parent_path(),
                                   PipelineConfig{}, 0);
  std::size_t checked = 0, bad = 0;
  for (const auto& img : batch.images) {
    for (int grid : {8, 16, 32}) {
      ++checked;
      if (block_features(img.minutiae, img.width, img.height, grid).total() !=
          img.minutiae.size()) {
        ++bad;
      }
    }
  }
  std::ifstream csv(manifest.parent_path() / "features.csv");
  const auto table = read_feature_csv(csv);
  bool csv_matches = table.rows.size() == batch.images.size();
  for (std::size_t i = 0; csv_matches && i < table.rows.size(); ++i) {
    csv_matches = table.rows[i].total() == batch.images[i].minutiae.size();
  }
  return {bad == 0 && csv_matches && !batch.images.empty(),
          std::to_string(batch.images.size()) + " images, " + std::to_string(checked - bad) +
              "/" + std::to_string(checked) + " grid checks conserve counts, feature CSV " +
              (csv_matches ? "agrees" : "DISAGREES")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "neighbor-count classification", 1.0, fig7_exactness},
      {2, "labeling vs flood fill", 5.0, flood_fill_equivalence},
      {3, "erosion oracle and laws", 5.0, erosion_laws},
      {4, "skeleton invariants", 10.0, skeleton_invariants},
      {5, "gradient check", 30.0, gradient_check},
      {6, "determinism", 0.0, determinism},
      {7, "end-to-end synthetic experiment", 180.0, end_to_end},
      {8, "single-image throughput", 0.0, throughput},
      {9, "feature conservation", 0.0, conservation},
  };
  fs::create_directories(kRunDir);
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = seconds_since(start);
    std::string budget;
    if (c.budget_s > 0 && elapsed >= c.budget_s) {
      o.pass = false;
      budget = ", over the " + fmt("%.0f", c.budget_s) + " s budget";
    }
    if (!o.pass) ++failures;
    std::printf("[%s] criterion %d %s: %s (%.2f s%s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), elapsed, budget.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failures),
              criteria.size());
  return failures == 0 ? 0 : 1;
}
