#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "thermoprint/features.hpp"

namespace thermoprint {

enum class BatchMode { full_batch, per_sample };

std::string_view to_string(BatchMode mode);
BatchMode parse_batch_mode(std::string_view name);

struct TrainConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
  int epochs = 500;
  BatchMode batch_mode = BatchMode::full_batch;
  double init_scale = 0.1;
  std::uint64_t seed = 1;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Fully connected tanh layer; weights are row-major outputs x inputs.
struct DenseLayer {
  int inputs = 0;
  int outputs = 0;
  std::vector<double> weights;
  std::vector<double> biases;

  double& weight(int out, int in) {
    return weights[static_cast<std::size_t>(out) * static_cast<std::size_t>(inputs) +
                   static_cast<std::size_t>(in)];
  }
  double weight(int out, int in) const {
    return weights[static_cast<std::size_t>(out) * static_cast<std::size_t>(inputs) +
                   static_cast<std::size_t>(in)];
  }
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Five-layer network: input, three hidden layers, output. Every computing
/// layer applies tanh.
struct MlpModel {
  static constexpr std::size_t kLayerDims = 5;

  std::vector<int> layer_dims;
  std::vector<DenseLayer> layers;
  // Raw feature counts are divided by this before the first layer.
  double input_scale = 1.0;
  TrainConfig config;

  int input_dim() const { return layer_dims.front(); }
  int num_classes() const { return layer_dims.back(); }

  // Throws ShapeError on broken shape chaining, DomainError on non-finite
  // parameters.
  void validate() const;

  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

// {input_dim, 100, 50, 10, num_classes}
std::vector<int> default_topology(int input_dim, int num_classes = 6);

// All parameters zero.
MlpModel make_zero_model(const std::vector<int>& layer_dims);
// Parameters uniform in [-init_scale, init_scale], drawn layer by layer,
// weights before biases.
MlpModel make_random_model(const std::vector<int>& layer_dims, double init_scale,
                           std::uint64_t seed);

/// Activations of every layer; activations[0] is the input.
struct ForwardPass {
  std::vector<std::vector<double>> activations;
  std::span<const double> output() const { return activations.back(); }
};

ForwardPass forward(const MlpModel& model, std::span<const double> x);

// 0.5 * sum((output - target)^2)
double loss(std::span<const double> output, std::span<const double> target);

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

Gradients zero_gradients(const MlpModel& model);

// Exact gradient of loss(forward(model, x), target) by backpropagation.
Gradients backward(const MlpModel& model, std::span<const double> x,
                   std::span<const double> target);

// One-hot encoding with +1 at the class and -1 elsewhere.
std::vector<double> encode_target(int label, int num_classes);

struct Sample {
  std::vector<double> x;  // already scaled
  int label = 0;
};

struct TrainResult {
  MlpModel model;
  // Mean per-sample loss measured during each epoch.
  std::vector<double> loss_history;
};

// Gradient descent with momentum: v = momentum * v - lr * grad; theta += v.
// In full-batch mode the step uses the gradient of the mean sample loss;
// per-sample mode steps after every sample in order. Throws
// DivergenceError if the loss becomes non-finite.
std::vector<double> train_model(MlpModel& model, const std::vector<Sample>& samples,
                                const TrainConfig& cfg);

// Derives the input scale from the largest training count, builds a
// default-topology model and trains it.
TrainResult train(const std::vector<FeatureVector>& train_set, const TrainConfig& cfg,
                  int num_classes = 6);

std::vector<double> scale_features(const MlpModel& model, const FeatureVector& fv);

// Index of the maximum; ties go to the lowest index.
int argmax(std::span<const double> values);

int predict(const MlpModel& model, const FeatureVector& fv);

struct Evaluation {
  std::size_t correct = 0;
  std::size_t total = 0;
  int num_classes = 0;
  // confusion[true * num_classes + predicted]
  std::vector<std::size_t> confusion;

  double accuracy() const noexcept {
    return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  }
  std::size_t at(int truth, int predicted) const {
    return confusion[static_cast<std::size_t>(truth * num_classes + predicted)];
  }
};

Evaluation evaluate(const MlpModel& model, const std::vector<FeatureVector>& test_set);

// Self-describing text format; doubles are written with 17 significant
// digits so save/load round-trips exactly.
void save_model(std::ostream& out, const MlpModel& model);
MlpModel load_model(std::istream& in);

}  // namespace thermoprint
