#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "thermoprint/features.hpp"
#include "thermoprint/minutiae.hpp"
#include "thermoprint/mlp.hpp"
#include "thermoprint/perfusion.hpp"
#include "thermoprint/segmentation.hpp"
#include "thermoprint/synth.hpp"

namespace thermoprint {

struct PipelineConfig {
  PerfusionConfig perfusion;
  PruneConfig prune;
  int grid = 8;
  TrainConfig train;
  double train_fraction = 0.5;
  std::uint64_t split_seed = 7;
  int num_classes = 6;

  void validate() const;
};

// Keys match the long command-line flags: grid, erode-iters, se,
// border-margin, min-sep, lr, momentum, epochs, batch-mode, init-scale,
// train-seed, seed (split seed), train-fraction, classes.
void apply_config_value(PipelineConfig& cfg, std::string_view key, std::string_view value);

// Plain "key = value" lines; '#' starts a comment.
void load_config_file(PipelineConfig& cfg, const std::filesystem::path& path);

// The effective configuration as "key = value" lines, parseable by
// load_config_file.
std::string describe(const PipelineConfig& cfg);

/// Everything the extraction pipeline produces for one image.
struct ImageAnalysis {
  SegmentedFace face;
  BinaryImage skeleton;
  std::vector<MinutiaPoint> raw_minutiae;
  std::vector<MinutiaPoint> minutiae;  // after pruning, crop coordinates
};

// segment -> erode + thin -> minutiae -> prune
ImageAnalysis analyze_image(const GrayImage& img, const PipelineConfig& cfg);

// Block counts over the cropped face. Throws Error if the counts do not sum
// to the number of retained minutiae.
FeatureVector features_for(const ImageAnalysis& analysis, int grid);

struct ExtractedImage {
  std::string filename;
  int label = 0;
  int width = 0;
  int height = 0;
  std::vector<MinutiaPoint> minutiae;
};

struct Reject {
  std::string filename;
  std::string reason;
};

struct BatchExtraction {
  std::vector<ExtractedImage> images;  // manifest order
  std::vector<Reject> rejects;
  std::size_t attempted = 0;

  static constexpr double kMaxRejectFraction = 0.10;
  bool too_many_rejects() const noexcept {
    return attempted > 0 && static_cast<double>(rejects.size()) >
                                kMaxRejectFraction * static_cast<double>(attempted);
  }
};

// Runs the extraction pipeline over every manifest entry, isolating
// per-image failures. Work is spread over `threads` workers (0 = hardware
// concurrency); results stay in manifest order.
BatchExtraction extract_batch(const std::vector<ManifestEntry>& entries,
                              const std::filesystem::path& base_dir,
                              const PipelineConfig& cfg, unsigned threads = 0);

// Labeled feature vectors for every extracted image at the given grid;
// verifies count conservation per image.
std::vector<FeatureVector> batch_features(const BatchExtraction& batch, int grid);

struct ExperimentResult {
  int grid = 0;
  std::size_t train_size = 0;
  Evaluation train_eval;
  Evaluation test_eval;
  std::vector<double> loss_history;
};

// split -> train -> evaluate on both halves.
ExperimentResult run_experiment(const std::vector<FeatureVector>& vectors,
                                const PipelineConfig& cfg);

}  // namespace thermoprint
