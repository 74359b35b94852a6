#include "thermoprint/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "thermoprint/errors.hpp"
#include "thermoprint/rng.hpp"

namespace thermoprint {

std::string_view to_string(BatchMode mode) {
  return mode == BatchMode::full_batch ? "full-batch" : "per-sample";
}

BatchMode parse_batch_mode(std::string_view name) {
  if (name == "full-batch") return BatchMode::full_batch;
  if (name == "per-sample") return BatchMode::per_sample;
  throw ConfigError("unknown batch mode '" + std::string(name) +
                    "' (expected full-batch or per-sample)");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be positive");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw ConfigError("momentum must lie in [0, 1)");
  }
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(init_scale > 0.0) || !std::isfinite(init_scale)) {
    throw ConfigError("init scale must be positive");
  }
}

void MlpModel::validate() const {
  if (layer_dims.size() != kLayerDims || layers.size() != kLayerDims - 1) {
    throw ShapeError("model must have 5 layers (4 weight matrices), got " +
                     std::to_string(layer_dims.size()) + " layer dims");
  }
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    if (layer_dims[k] < 1 || layer_dims[k + 1] < 1 || l.inputs != layer_dims[k] ||
        l.outputs != layer_dims[k + 1] ||
        l.weights.size() != static_cast<std::size_t>(l.inputs) *
                                static_cast<std::size_t>(l.outputs) ||
        l.biases.size() != static_cast<std::size_t>(l.outputs)) {
      throw ShapeError("layer " + std::to_string(k) + " shape does not chain");
    }
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(l.weights.begin(), l.weights.end(), finite) ||
        !std::all_of(l.biases.begin(), l.biases.end(), finite)) {
      throw DomainError("layer " + std::to_string(k) + " has non-finite parameters");
    }
  }
  if (!(input_scale > 0.0) || !std::isfinite(input_scale)) {
    throw DomainError("input scale must be positive");
  }
}

std::vector<int> default_topology(int input_dim, int num_classes) {
  return {input_dim, 100, 50, 10, num_classes};
}

MlpModel make_zero_model(const std::vector<int>& layer_dims) {
  if (layer_dims.size() != MlpModel::kLayerDims) {
    throw ShapeError("model must have 5 layer dims");
  }
  MlpModel m;
  m.layer_dims = layer_dims;
  for (std::size_t k = 0; k + 1 < layer_dims.size(); ++k) {
    if (layer_dims[k] < 1 || layer_dims[k + 1] < 1) {
      throw ShapeError("layer dims must be positive");
    }
    DenseLayer l;
    l.inputs = layer_dims[k];
    l.outputs = layer_dims[k + 1];
    l.weights.assign(static_cast<std::size_t>(l.inputs) *
                         static_cast<std::size_t>(l.outputs),
                     0.0);
    l.biases.assign(static_cast<std::size_t>(l.outputs), 0.0);
    m.layers.push_back(std::move(l));
  }
  return m;
}

MlpModel make_random_model(const std::vector<int>& layer_dims, double init_scale,
                           std::uint64_t seed) {
  MlpModel m = make_zero_model(layer_dims);
  SplitMix64 rng(seed);
  for (auto& l : m.layers) {
    for (auto& w : l.weights) w = rng.uniform(-init_scale, init_scale);
    for (auto& b : l.biases) b = rng.uniform(-init_scale, init_scale);
  }
  return m;
}

ForwardPass forward(const MlpModel& model, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(model.input_dim())) {
    throw ShapeError("feature length " + std::to_string(x.size()) +
                     " does not match model input length " +
                     std::to_string(model.input_dim()));
  }
  ForwardPass pass;
  pass.activations.reserve(model.layers.size() + 1);
  pass.activations.emplace_back(x.begin(), x.end());
  for (const auto& l : model.layers) {
    const auto& in = pass.activations.back();
    std::vector<double> out(static_cast<std::size_t>(l.outputs));
    for (int o = 0; o < l.outputs; ++o) {
      const double* row = l.weights.data() + static_cast<std::size_t>(o) *
                                                 static_cast<std::size_t>(l.inputs);
      double net = l.biases[static_cast<std::size_t>(o)];
      for (int i = 0; i < l.inputs; ++i) net += row[i] * in[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(o)] = std::tanh(net);
    }
    pass.activations.push_back(std::move(out));
  }
  return pass;
}

double loss(std::span<const double> output, std::span<const double> target) {
  if (output.size() != target.size()) {
    throw ShapeError("output length " + std::to_string(output.size()) +
                     " does not match target length " + std::to_string(target.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < output.size(); ++i) {
    const double d = output[i] - target[i];
    sum += d * d;
  }
  return 0.5 * sum;
}

Gradients zero_gradients(const MlpModel& model) {
  Gradients g;
  for (const auto& l : model.layers) {
    g.weights.emplace_back(l.weights.size(), 0.0);
    g.biases.emplace_back(l.biases.size(), 0.0);
  }
  return g;
}

namespace {

// Adds the gradient for one sample into `acc` and returns the sample loss.
double accumulate_gradients(const MlpModel& model, std::span<const double> x,
                            std::span<const double> target, Gradients& acc) {
  const auto pass = forward(model, x);
  const auto out = pass.output();
  const double sample_loss = loss(out, target);

  std::vector<double> delta(out.size());
  for (std::size_t o = 0; o < out.size(); ++o) {
    delta[o] = (out[o] - target[o]) * (1.0 - out[o] * out[o]);
  }
  for (std::size_t k = model.layers.size(); k-- > 0;) {
    const auto& l = model.layers[k];
    const auto& in = pass.activations[k];
    auto& gw = acc.weights[k];
    auto& gb = acc.biases[k];
    for (int o = 0; o < l.outputs; ++o) {
      const double d = delta[static_cast<std::size_t>(o)];
      gb[static_cast<std::size_t>(o)] += d;
      double* row = gw.data() + static_cast<std::size_t>(o) *
                                    static_cast<std::size_t>(l.inputs);
      for (int i = 0; i < l.inputs; ++i) row[i] += d * in[static_cast<std::size_t>(i)];
    }
    if (k == 0) break;
    std::vector<double> prev(static_cast<std::size_t>(l.inputs), 0.0);
    for (int o = 0; o < l.outputs; ++o) {
      const double d = delta[static_cast<std::size_t>(o)];
      const double* row = l.weights.data() + static_cast<std::size_t>(o) *
                                                 static_cast<std::size_t>(l.inputs);
      for (int i = 0; i < l.inputs; ++i) prev[static_cast<std::size_t>(i)] += row[i] * d;
    }
    for (std::size_t i = 0; i < prev.size(); ++i) {
      prev[i] *= 1.0 - in[i] * in[i];
    }
    delta = std::move(prev);
  }
  return sample_loss;
}

void apply_momentum_step(MlpModel& model, const Gradients& grad, Gradients& velocity,
                         const TrainConfig& cfg) {
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    auto& l = model.layers[k];
    for (std::size_t i = 0; i < l.weights.size(); ++i) {
      auto& v = velocity.weights[k][i];
      v = cfg.momentum * v - cfg.learning_rate * grad.weights[k][i];
      l.weights[i] += v;
    }
    for (std::size_t i = 0; i < l.biases.size(); ++i) {
      auto& v = velocity.biases[k][i];
      v = cfg.momentum * v - cfg.learning_rate * grad.biases[k][i];
      l.biases[i] += v;
    }
  }
}

void clear(Gradients& g) {
  for (auto& w : g.weights) std::fill(w.begin(), w.end(), 0.0);
  for (auto& b : g.biases) std::fill(b.begin(), b.end(), 0.0);
}

}  // namespace

Gradients backward(const MlpModel& model, std::span<const double> x,
                   std::span<const double> target) {
  if (target.size() != static_cast<std::size_t>(model.num_classes())) {
    throw ShapeError("target length " + std::to_string(target.size()) +
                     " does not match " + std::to_string(model.num_classes()) +
                     " outputs");
  }
  Gradients g = zero_gradients(model);
  accumulate_gradients(model, x, target, g);
  return g;
}

std::vector<double> encode_target(int label, int num_classes) {
  if (label < 0 || label >= num_classes) {
    throw BoundsError("label " + std::to_string(label) + " outside [0, " +
                      std::to_string(num_classes) + ")");
  }
  std::vector<double> t(static_cast<std::size_t>(num_classes), -1.0);
  t[static_cast<std::size_t>(label)] = 1.0;
  return t;
}

std::vector<double> train_model(MlpModel& model, const std::vector<Sample>& samples,
                                const TrainConfig& cfg) {
  cfg.validate();
  model.validate();
  std::vector<std::vector<double>> targets;
  targets.reserve(samples.size());
  for (const auto& s : samples) targets.push_back(encode_target(s.label, model.num_classes()));

  Gradients velocity = zero_gradients(model);
  Gradients grad = zero_gradients(model);
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(cfg.epochs));
  if (samples.empty()) return history;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    if (cfg.batch_mode == BatchMode::full_batch) {
      clear(grad);
      for (std::size_t i = 0; i < samples.size(); ++i) {
        epoch_loss += accumulate_gradients(model, samples[i].x, targets[i], grad);
      }
      if (!std::isfinite(epoch_loss)) throw DivergenceError(epoch);
      const double inv = 1.0 / static_cast<double>(samples.size());
      for (auto& w : grad.weights) for (auto& v : w) v *= inv;
      for (auto& b : grad.biases) for (auto& v : b) v *= inv;
      apply_momentum_step(model, grad, velocity, cfg);
    } else {
      for (std::size_t i = 0; i < samples.size(); ++i) {
        clear(grad);
        epoch_loss += accumulate_gradients(model, samples[i].x, targets[i], grad);
        if (!std::isfinite(epoch_loss)) throw DivergenceError(epoch);
        apply_momentum_step(model, grad, velocity, cfg);
      }
    }
    history.push_back(epoch_loss / static_cast<double>(samples.size()));
  }
  return history;
}

std::vector<double> scale_features(const MlpModel& model, const FeatureVector& fv) {
  std::vector<double> x(fv.counts.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<double>(fv.counts[i]) / model.input_scale;
  }
  return x;
}

TrainResult train(const std::vector<FeatureVector>& train_set, const TrainConfig& cfg,
                  int num_classes) {
  cfg.validate();
  if (train_set.empty()) throw InsufficientDataError("training set is empty");
  if (num_classes < 1) throw ConfigError("num_classes must be positive");
  const std::size_t dim = train_set.front().counts.size();
  std::uint32_t max_count = 0;
  for (const auto& fv : train_set) {
    if (fv.counts.size() != dim) {
      throw ShapeError("training vectors differ in length (" + std::to_string(dim) +
                       " vs " + std::to_string(fv.counts.size()) + ")");
    }
    if (!fv.label) throw InsufficientDataError("training sample without label");
    for (auto c : fv.counts) max_count = std::max(max_count, c);
  }

  TrainResult result{make_random_model(default_topology(static_cast<int>(dim), num_classes),
                                       cfg.init_scale, cfg.seed),
                     {}};
  result.model.input_scale = max_count > 0 ? static_cast<double>(max_count) : 1.0;
  result.model.config = cfg;

  std::vector<Sample> samples;
  samples.reserve(train_set.size());
  for (const auto& fv : train_set) {
    samples.push_back({scale_features(result.model, fv), *fv.label});
  }
  result.loss_history = train_model(result.model, samples, cfg);
  return result;
}

int argmax(std::span<const double> values) {
  if (values.empty()) throw ShapeError("argmax of empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return static_cast<int>(best);
}

int predict(const MlpModel& model, const FeatureVector& fv) {
  const auto x = scale_features(model, fv);
  return argmax(forward(model, x).output());
}

Evaluation evaluate(const MlpModel& model, const std::vector<FeatureVector>& test_set) {
  Evaluation ev;
  ev.num_classes = model.num_classes();
  ev.confusion.assign(static_cast<std::size_t>(ev.num_classes) *
                          static_cast<std::size_t>(ev.num_classes),
                      0);
  for (const auto& fv : test_set) {
    if (!fv.label) throw InsufficientDataError("evaluation sample without label");
    const int truth = *fv.label;
    if (truth < 0 || truth >= ev.num_classes) {
      throw BoundsError("label " + std::to_string(truth) + " outside [0, " +
                        std::to_string(ev.num_classes) + ")");
    }
    const int guess = predict(model, fv);
    ++ev.confusion[static_cast<std::size_t>(truth * ev.num_classes + guess)];
    ++ev.total;
    if (guess == truth) ++ev.correct;
  }
  return ev;
}

}  // namespace thermoprint
