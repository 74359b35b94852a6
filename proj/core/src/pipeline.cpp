#include "thermoprint/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <sstream>
#include <thread>

#include "thermoprint/errors.hpp"
#include "thermoprint/pgm.hpp"

namespace thermoprint {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key));
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

void PipelineConfig::validate() const {
  perfusion.validate();
  train.validate();
  if (grid < 2) throw ConfigError("grid must be >= 2, got " + std::to_string(grid));
  if (prune.border_margin < 0 || prune.min_separation < 0) {
    throw ConfigError("prune parameters must be >= 0");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0, 1)");
  }
  if (num_classes < 1) throw ConfigError("classes must be >= 1");
}

void apply_config_value(PipelineConfig& cfg, std::string_view key, std::string_view value) {
  if (key == "grid") {
    cfg.grid = parse_number<int>(key, value);
  } else if (key == "erode-iters") {
    cfg.perfusion.erosion_iterations = parse_number<int>(key, value);
  } else if (key == "se") {
    cfg.perfusion.structuring_element = parse_structuring_element(value);
  } else if (key == "border-margin") {
    cfg.prune.border_margin = parse_number<int>(key, value);
  } else if (key == "min-sep") {
    cfg.prune.min_separation = parse_number<int>(key, value);
  } else if (key == "lr") {
    cfg.train.learning_rate = parse_number<double>(key, value);
  } else if (key == "momentum") {
    cfg.train.momentum = parse_number<double>(key, value);
  } else if (key == "epochs") {
    cfg.train.epochs = parse_number<int>(key, value);
  } else if (key == "batch-mode") {
    cfg.train.batch_mode = parse_batch_mode(value);
  } else if (key == "init-scale") {
    cfg.train.init_scale = parse_number<double>(key, value);
  } else if (key == "train-seed") {
    cfg.train.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "seed") {
    cfg.split_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "train-fraction") {
    cfg.train_fraction = parse_number<double>(key, value);
  } else if (key == "classes") {
    cfg.num_classes = parse_number<int>(key, value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

void load_config_file(PipelineConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    apply_config_value(cfg, trim(std::string_view(line).substr(0, eq)),
                       trim(std::string_view(line).substr(eq + 1)));
  }
}

std::string describe(const PipelineConfig& cfg) {
  std::ostringstream out;
  out << "grid = " << cfg.grid << '\n'
      << "erode-iters = " << cfg.perfusion.erosion_iterations << '\n'
      << "se = " << to_string(cfg.perfusion.structuring_element) << '\n'
      << "border-margin = " << cfg.prune.border_margin << '\n'
      << "min-sep = " << cfg.prune.min_separation << '\n'
      << "lr = " << format_double(cfg.train.learning_rate) << '\n'
      << "momentum = " << format_double(cfg.train.momentum) << '\n'
      << "epochs = " << cfg.train.epochs << '\n'
      << "batch-mode = " << to_string(cfg.train.batch_mode) << '\n'
      << "init-scale = " << format_double(cfg.train.init_scale) << '\n'
      << "train-seed = " << cfg.train.seed << '\n'
      << "seed = " << cfg.split_seed << '\n'
      << "train-fraction = " << format_double(cfg.train_fraction) << '\n'
      << "classes = " << cfg.num_classes << '\n';
  return out.str();
}

ImageAnalysis analyze_image(const GrayImage& img, const PipelineConfig& cfg) {
  ImageAnalysis a;
  a.face = segment_face(img);
  a.skeleton = extract_perfusion(a.face.mask, cfg.perfusion);
  a.raw_minutiae = extract_minutiae(a.skeleton);
  a.minutiae = prune_minutiae(a.raw_minutiae, a.skeleton.width(), a.skeleton.height(),
                              cfg.prune);
  return a;
}

FeatureVector features_for(const ImageAnalysis& analysis, int grid) {
  auto fv = block_features(analysis.minutiae, analysis.skeleton.width(),
                           analysis.skeleton.height(), grid);
  if (fv.total() != analysis.minutiae.size()) {
    throw Error("feature counts sum to " + std::to_string(fv.total()) + " but " +
                std::to_string(analysis.minutiae.size()) + " minutiae were retained");
  }
  return fv;
}

BatchExtraction extract_batch(const std::vector<ManifestEntry>& entries,
                              const std::filesystem::path& base_dir,
                              const PipelineConfig& cfg, unsigned threads) {
  cfg.validate();
  struct Slot {
    std::optional<ExtractedImage> image;
    std::string error;
  };
  std::vector<Slot> slots(entries.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      const auto& e = entries[i];
      try {
        const auto analysis = analyze_image(load_pgm(base_dir / e.filename), cfg);
        slots[i].image = ExtractedImage{e.filename, e.label, analysis.skeleton.width(),
                                        analysis.skeleton.height(), analysis.minutiae};
      } catch (const std::exception& ex) {
        slots[i].error = ex.what();
      }
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(
      std::min<std::size_t>(threads, std::max<std::size_t>(1, entries.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  BatchExtraction batch;
  batch.attempted = entries.size();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (slots[i].image) {
      batch.images.push_back(std::move(*slots[i].image));
    } else {
      batch.rejects.push_back({entries[i].filename, slots[i].error});
    }
  }
  return batch;
}

std::vector<FeatureVector> batch_features(const BatchExtraction& batch, int grid) {
  std::vector<FeatureVector> out;
  out.reserve(batch.images.size());
  for (const auto& img : batch.images) {
    auto fv = block_features(img.minutiae, img.width, img.height, grid);
    if (fv.total() != img.minutiae.size()) {
      throw Error(img.filename + ": feature counts do not sum to the retained minutiae");
    }
    fv.label = img.label;
    out.push_back(std::move(fv));
  }
  return out;
}

ExperimentResult run_experiment(const std::vector<FeatureVector>& vectors,
                                const PipelineConfig& cfg) {
  cfg.validate();
  if (vectors.empty()) throw InsufficientDataError("no feature vectors to train on");
  const auto split = split_dataset(vectors, cfg.train_fraction, cfg.split_seed);
  auto trained = train(split.train, cfg.train, cfg.num_classes);
  ExperimentResult result;
  result.grid = vectors.front().grid;
  result.train_size = split.train.size();
  result.train_eval = evaluate(trained.model, split.train);
  result.test_eval = evaluate(trained.model, split.test);
  result.loss_history = std::move(trained.loss_history);
  return result;
}

}  // namespace thermoprint
