#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "oracles.hpp"
#include "thermoprint/errors.hpp"
#include "thermoprint/mlp.hpp"

using namespace thermoprint;

namespace {

std::vector<double> random_input(std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.unit();
  return x;
}

// Separable toy set: class is whether feature 0 + feature 1 exceeds the
// sum of features 2 and 3, with a margin.
std::vector<Sample> separable_set() {
  SplitMix64 rng(42);
  std::vector<Sample> out;
  while (out.size() < 20) {
    std::vector<double> x(4);
    for (auto& v : x) v = rng.unit();
    const double margin = x[0] + x[1] - x[2] - x[3];
    if (std::abs(margin) < 0.2) continue;
    const int label = margin > 0 ? 1 : 0;
    if (static_cast<int>(std::count_if(out.begin(), out.end(),
                                       [&](const Sample& s) { return s.label == label; })) >= 10) {
      continue;
    }
    out.push_back({x, label});
  }
  return out;
}

}  // namespace

TEST(Forward, ZeroModelGivesZeros) {
  const auto m = make_zero_model(default_topology(64));
  const auto pass = forward(m, random_input(64, 1));
  EXPECT_EQ(pass.activations.size(), 5u);
  for (double v : pass.output()) EXPECT_EQ(v, 0.0);
}

TEST(Forward, UnitChainAtZero) {
  auto m = make_zero_model({1, 1, 1, 1, 1});
  for (auto& layer : m.layers) layer.weights = {1.0};
  const std::vector<double> x{0.0};
  EXPECT_EQ(forward(m, x).output()[0], 0.0);
}

TEST(Forward, MatchesHandRolledOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = make_random_model(default_topology(64), 0.5, seed);
    const auto x = random_input(64, seed + 100);
    const auto pass = forward(m, x);
    const auto out = pass.output();
    const auto ref = oracle::forward_by_hand(m, x);
    ASSERT_EQ(out.size(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
      EXPECT_NEAR(out[i], ref[i], 1e-12);
      EXPECT_GT(out[i], -1.0);
      EXPECT_LT(out[i], 1.0);
    }
  }
}

TEST(Forward, LengthMismatchNamesBothSizes) {
  const auto m = make_zero_model(default_topology(64));
  try {
    forward(m, random_input(256, 1));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("256"), std::string::npos);
    EXPECT_NE(msg.find("64"), std::string::npos);
  }
}

TEST(Loss, Examples) {
  const std::vector<double> a{0.3, -0.2};
  EXPECT_EQ(loss(a, a), 0.0);
  EXPECT_DOUBLE_EQ(loss(std::vector<double>{0, 0}, std::vector<double>{1, -1}), 1.0);
  SplitMix64 rng(5);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> o(6), t(6);
    for (auto& v : o) v = rng.uniform(-1, 1);
    for (auto& v : t) v = rng.uniform(-1, 1);
    EXPECT_GE(loss(o, t), 0.0);
  }
}

TEST(Backward, MatchesFiniteDifferences) {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = make_random_model(default_topology(64), 0.1, seed);
    const auto x = random_input(64, seed + 1);
    const auto t = encode_target(static_cast<int>(seed % 6), 6);
    const auto g = backward(m, x, t);
    const auto fd = oracle::finite_difference_gradients(m, x, t, 1e-5);
    for (std::size_t k = 0; k < 4; ++k) {
      auto check = [&](const std::vector<double>& a, const std::vector<double>& n) {
        for (std::size_t i = 0; i < a.size(); ++i) {
          const double scale = std::max(std::abs(a[i]), std::abs(n[i]));
          if (scale > 0) worst = std::max(worst, std::abs(a[i] - n[i]) / scale);
        }
      };
      check(g.weights[k], fd.weights[k]);
      check(g.biases[k], fd.biases[k]);
    }
  }
  RecordProperty("max_relative_error", std::to_string(worst));
  std::printf("max relative error %.3e\n", worst);
  EXPECT_LT(worst, 1e-5);
}

TEST(Backward, ZeroAtExactTarget) {
  const auto m = make_random_model({3, 4, 4, 4, 2}, 0.3, 9);
  const std::vector<double> x{0.1, 0.2, 0.3};
  const auto pass = forward(m, x);
  const std::vector<double> t(pass.output().begin(), pass.output().end());
  const auto g = backward(m, x, t);
  for (std::size_t k = 0; k < 4; ++k) {
    for (double v : g.weights[k]) EXPECT_EQ(v, 0.0);
    for (double v : g.biases[k]) EXPECT_EQ(v, 0.0);
  }
}

TEST(Backward, ZeroInputZeroesFirstLayerWeights) {
  const auto m = make_random_model(default_topology(16), 0.1, 3);
  const auto g = backward(m, std::vector<double>(16, 0.0), encode_target(2, 6));
  for (double v : g.weights[0]) EXPECT_EQ(v, 0.0);
  EXPECT_TRUE(std::any_of(g.biases[0].begin(), g.biases[0].end(),
                          [](double v) { return v != 0.0; }));
}

TEST(Targets, PlusMinusOneHot) {
  EXPECT_EQ(encode_target(2, 4), (std::vector<double>{-1, -1, 1, -1}));
  EXPECT_THROW(encode_target(4, 4), BoundsError);
}

TEST(Train, MomentumZeroIsPlainGradientDescent) {
  const auto samples = separable_set();
  TrainConfig cfg;
  cfg.momentum = 0.0;
  cfg.learning_rate = 0.05;
  cfg.epochs = 1;
  auto model = make_random_model({4, 100, 50, 10, 2}, 0.1, 17);
  auto manual = model;
  for (int step = 0; step < 5; ++step) {
    train_model(model, samples, cfg);

    auto sum = zero_gradients(manual);
    for (const auto& s : samples) {
      const auto g = backward(manual, s.x, encode_target(s.label, 2));
      for (std::size_t k = 0; k < 4; ++k) {
        for (std::size_t i = 0; i < g.weights[k].size(); ++i) sum.weights[k][i] += g.weights[k][i];
        for (std::size_t i = 0; i < g.biases[k].size(); ++i) sum.biases[k][i] += g.biases[k][i];
      }
    }
    const double inv = 1.0 / static_cast<double>(samples.size());
    for (std::size_t k = 0; k < 4; ++k) {
      auto& layer = manual.layers[k];
      for (std::size_t i = 0; i < layer.weights.size(); ++i) {
        layer.weights[i] -= cfg.learning_rate * (sum.weights[k][i] * inv);
      }
      for (std::size_t i = 0; i < layer.biases.size(); ++i) {
        layer.biases[i] -= cfg.learning_rate * (sum.biases[k][i] * inv);
      }
    }
    ASSERT_EQ(model.layers, manual.layers) << "step " << step;
  }
}

TEST(Train, PerSampleSingleStepMatchesGradient) {
  TrainConfig cfg;
  cfg.momentum = 0.0;
  cfg.epochs = 1;
  cfg.batch_mode = BatchMode::per_sample;
  auto model = make_random_model({3, 5, 5, 5, 2}, 0.2, 4);
  const Sample s{{0.2, 0.7, 0.1}, 1};
  const auto g = backward(model, s.x, encode_target(1, 2));
  auto expected = model;
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t i = 0; i < g.weights[k].size(); ++i) {
      expected.layers[k].weights[i] -= cfg.learning_rate * g.weights[k][i];
    }
    for (std::size_t i = 0; i < g.biases[k].size(); ++i) {
      expected.layers[k].biases[i] -= cfg.learning_rate * g.biases[k][i];
    }
  }
  train_model(model, {s}, cfg);
  EXPECT_EQ(model.layers, expected.layers);
}

TEST(Train, MomentumAccumulatesVelocity) {
  // Two epochs on one sample: second step is mu * v1 - lr * g2.
  TrainConfig cfg;
  cfg.epochs = 2;
  auto model = make_random_model({2, 3, 3, 3, 2}, 0.3, 8);
  const Sample s{{0.5, 0.9}, 0};
  const auto t = encode_target(0, 2);
  auto manual = model;
  std::vector<double> v;
  for (int step = 0; step < 2; ++step) {
    const auto g = backward(manual, s.x, t);
    std::size_t j = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      auto upd = [&](double& p, double grad) {
        if (v.size() <= j) v.push_back(0.0);
        v[j] = cfg.momentum * v[j] - cfg.learning_rate * grad;
        p += v[j];
        ++j;
      };
      for (std::size_t i = 0; i < g.weights[k].size(); ++i) {
        upd(manual.layers[k].weights[i], g.weights[k][i]);
      }
      for (std::size_t i = 0; i < g.biases[k].size(); ++i) {
        upd(manual.layers[k].biases[i], g.biases[k][i]);
      }
    }
  }
  train_model(model, {s}, cfg);
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t i = 0; i < model.layers[k].weights.size(); ++i) {
      EXPECT_NEAR(model.layers[k].weights[i], manual.layers[k].weights[i], 1e-15);
    }
  }
}

TEST(Train, SeparableToySetReachesFullAccuracy) {
  const auto samples = separable_set();
  auto model = make_random_model({4, 100, 50, 10, 2}, 0.1, 1);
  const auto history = train_model(model, samples, TrainConfig{});
  ASSERT_EQ(history.size(), 500u);
  EXPECT_LT(history.back(), history.front());
  int correct = 0;
  for (const auto& s : samples) correct += argmax(forward(model, s.x).output()) == s.label;
  EXPECT_EQ(correct, 20);
}

TEST(Train, DeterministicForSameSeed) {
  std::vector<FeatureVector> data;
  SplitMix64 rng(3);
  for (int i = 0; i < 30; ++i) {
    FeatureVector fv{4, std::vector<std::uint32_t>(16), i % 3};
    for (auto& c : fv.counts) c = static_cast<std::uint32_t>(rng.below(5));
    data.push_back(fv);
  }
  TrainConfig cfg;
  cfg.epochs = 50;
  const auto a = train(data, cfg, 3);
  const auto b = train(data, cfg, 3);
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.loss_history, b.loss_history);
  cfg.seed = 2;
  EXPECT_NE(train(data, cfg, 3).model, a.model);
}

TEST(Train, DivergenceNamesEpoch) {
  auto model = make_random_model({2, 3, 3, 3, 2}, 0.1, 1);
  std::vector<Sample> samples{{{std::nan(""), 0.0}, 0}};
  try {
    train_model(model, samples, TrainConfig{});
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.epoch(), 1);
  }
}

TEST(Train, InputScaleIsLargestTrainingCount) {
  std::vector<FeatureVector> data{{2, {1, 7, 0, 2}, 0}, {2, {3, 0, 0, 0}, 1}};
  TrainConfig cfg;
  cfg.epochs = 1;
  EXPECT_EQ(train(data, cfg, 2).model.input_scale, 7.0);
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.momentum = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.momentum = -0.1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_EQ(parse_batch_mode("per-sample"), BatchMode::per_sample);
  EXPECT_EQ(to_string(BatchMode::full_batch), "full-batch");
}

TEST(Predict, ArgmaxTiesToLowest) {
  EXPECT_EQ(argmax(std::vector<double>{-0.2, 0.9, 0.1}), 1);
  EXPECT_EQ(argmax(std::vector<double>{0.5, 0.5, 0.1}), 0);
}

TEST(Predict, OutputPermutationPermutesPrediction) {
  const std::vector<int> perm{3, 0, 5, 1, 4, 2};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto m = make_random_model(default_topology(16), 0.8, seed);
    auto permuted = m;
    auto& out = m.layers.back();
    auto& pout = permuted.layers.back();
    for (int c = 0; c < 6; ++c) {
      const int target = perm[static_cast<std::size_t>(c)];
      pout.biases[static_cast<std::size_t>(target)] = out.biases[static_cast<std::size_t>(c)];
      for (int i = 0; i < out.inputs; ++i) pout.weight(target, i) = out.weight(c, i);
    }
    FeatureVector fv{4, std::vector<std::uint32_t>(16)};
    SplitMix64 rng(seed);
    for (auto& c : fv.counts) c = static_cast<std::uint32_t>(rng.below(3));
    EXPECT_EQ(predict(permuted, fv), perm[static_cast<std::size_t>(predict(m, fv))]);
  }
}

TEST(Evaluate, ConfusionIdentities) {
  const auto m = make_random_model(default_topology(4), 0.9, 12);
  std::vector<FeatureVector> test;
  SplitMix64 rng(1);
  std::vector<std::size_t> per_class(6, 0);
  for (int i = 0; i < 60; ++i) {
    FeatureVector fv{2, std::vector<std::uint32_t>(4), static_cast<int>(rng.below(6))};
    for (auto& c : fv.counts) c = static_cast<std::uint32_t>(rng.below(4));
    ++per_class[static_cast<std::size_t>(*fv.label)];
    test.push_back(fv);
  }
  const auto ev = evaluate(m, test);
  EXPECT_EQ(ev.total, 60u);
  std::size_t trace = 0, sum = 0;
  for (int t = 0; t < 6; ++t) {
    std::size_t row = 0;
    for (int p = 0; p < 6; ++p) row += ev.at(t, p);
    EXPECT_EQ(row, per_class[static_cast<std::size_t>(t)]);
    trace += ev.at(t, t);
    sum += row;
  }
  EXPECT_EQ(sum, ev.total);
  EXPECT_EQ(trace, ev.correct);
  EXPECT_DOUBLE_EQ(ev.accuracy(), static_cast<double>(trace) / 60.0);
}

TEST(Evaluate, ConvergedOnSingleSample) {
  std::vector<FeatureVector> one{{2, {3, 1, 0, 2}, 4}};
  const auto result = train(one, TrainConfig{}, 6);
  EXPECT_EQ(evaluate(result.model, one).accuracy(), 1.0);
}

TEST(ModelIo, RoundTripIsBitExact) {
  std::vector<FeatureVector> data;
  for (int i = 0; i < 12; ++i) data.push_back({2, {std::uint32_t(i), 1, 2, 3}, i % 3});
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.batch_mode = BatchMode::per_sample;
  auto model = train(data, cfg, 3).model;
  model.layers[0].weights[0] = 0.1;
  model.layers[1].biases[0] = -1e-300;
  model.layers[2].weights[3] = 1.0 / 3.0;
  std::stringstream ss;
  save_model(ss, model);
  const auto loaded = load_model(ss);
  EXPECT_EQ(loaded, model);
}

TEST(ModelIo, RejectsDamagedFiles) {
  const auto model = make_random_model({2, 3, 3, 3, 2}, 0.1, 1);
  std::stringstream ss;
  save_model(ss, model);
  std::string text = ss.str();
  std::istringstream truncated(text.substr(0, text.size() / 2));
  EXPECT_THROW(load_model(truncated), Error);
  std::istringstream wrong_magic("not-a-model 1\n");
  EXPECT_THROW(load_model(wrong_magic), FormatError);
}
