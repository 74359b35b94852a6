#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "thermoprint/errors.hpp"
#include "thermoprint/pgm.hpp"
#include "thermoprint/pipeline.hpp"

namespace thermoprint::cli {

namespace {

namespace fs = std::filesystem;

// Usage problems detected after CLI11 parsing (missing positional, bad mix of
// flags) are reported with this and mapped to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Config sources in precedence order: explicit flags > --config file >
/// built-in defaults. Flags are captured as raw strings and fed through the
/// same key parser as the config file.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::optional<std::string>> values;

  void add(CLI::App& app, const std::string& flag, const std::string& key,
           const std::string& help) {
    app.add_option(flag, values[key], help);
  }

  PipelineConfig resolve() const {
    PipelineConfig cfg;
    if (!config_file.empty()) load_config_file(cfg, config_file);
    for (const auto& [key, value] : values) {
      if (value) apply_config_value(cfg, key, *value);
    }
    cfg.validate();
    return cfg;
  }
};

void add_config_flag(CLI::App& app, ConfigFlags& flags) {
  app.add_option("--config", flags.config_file, "Plain 'key = value' config file")
      ->check(CLI::ExistingFile);
}

void add_pipeline_flags(CLI::App& app, ConfigFlags& flags) {
  flags.add(app, "--grid", "grid", "Cells per side of the block grid (default 8)");
  flags.add(app, "--erode-iters", "erode-iters", "Erosion iterations (default 1)");
  flags.add(app, "--se", "se", "Structuring element: cross3 | square3");
  flags.add(app, "--border-margin", "border-margin", "Minutiae border margin in px (default 2)");
  flags.add(app, "--min-sep", "min-sep", "Minimum minutiae separation in px (default 4)");
}

void add_training_flags(CLI::App& app, ConfigFlags& flags) {
  flags.add(app, "--lr", "lr", "Learning rate (default 0.01)");
  flags.add(app, "--momentum", "momentum", "Momentum coefficient (default 0.9)");
  flags.add(app, "--epochs", "epochs", "Training epochs (default 500)");
  flags.add(app, "--batch-mode", "batch-mode", "full-batch | per-sample");
  flags.add(app, "--init-scale", "init-scale", "Uniform init half-width (default 0.1)");
  flags.add(app, "--classes", "classes", "Number of output classes (default 6)");
}

void add_split_flags(CLI::App& app, ConfigFlags& flags) {
  flags.add(app, "--seed", "seed", "Split seed (default 7)");
  flags.add(app, "--train-fraction", "train-fraction", "Training fraction (default 0.5)");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

FeatureTable load_features(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_feature_csv(in);
}

void save_features(const fs::path& path, const std::vector<FeatureVector>& rows,
                   std::size_t feature_count) {
  std::ostringstream csv;
  write_feature_csv(csv, rows, feature_count);
  write_text(path, csv.str());
}

MlpModel load_model_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return load_model(in);
}

void echo_config(std::ostream& out, const PipelineConfig& cfg) {
  std::istringstream lines(describe(cfg));
  std::string line;
  while (std::getline(lines, line)) out << "# " << line << '\n';
}

std::string percent(double fraction) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << 100.0 * fraction << '%';
  return s.str();
}

void print_confusion(std::ostream& out, const Evaluation& ev) {
  out << "confusion (rows = true class, columns = predicted class):\n";
  out << std::setw(6) << "";
  for (int p = 0; p < ev.num_classes; ++p) out << std::setw(6) << p;
  out << '\n';
  for (int t = 0; t < ev.num_classes; ++t) {
    out << std::setw(6) << t;
    for (int p = 0; p < ev.num_classes; ++p) out << std::setw(6) << ev.at(t, p);
    out << '\n';
  }
}

void check_feature_length(const MlpModel& model, std::size_t feature_count) {
  if (feature_count != static_cast<std::size_t>(model.input_dim())) {
    throw ShapeError("shape mismatch: features have " + std::to_string(feature_count) +
                     " entries but the model expects " +
                     std::to_string(model.input_dim()));
  }
}

BatchExtraction run_batch(const fs::path& manifest_path, const PipelineConfig& cfg,
                          unsigned threads, std::ostream& err) {
  const auto entries = load_manifest(manifest_path);
  auto batch = extract_batch(entries, manifest_path.parent_path(), cfg, threads);
  for (const auto& r : batch.rejects) err << "reject " << r.filename << ": " << r.reason << '\n';
  return batch;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Minutiae-based thermal face recognition pipeline", "thermoprint"};
  app.require_subcommand(1);
  std::function<int()> action;

  // synth
  int synth_identities = 6;
  int synth_samples = 34;
  std::uint64_t synth_seed = 1;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled image set");
  synth->add_option("-n,--identities", synth_identities, "Number of identities")
      ->check(CLI::Range(1, 1 << 20));
  synth->add_option("-k,--samples", synth_samples, "Images per identity")
      ->check(CLI::Range(1, 1 << 20));
  synth->add_option("--seed", synth_seed, "Master seed");
  synth->add_option("-o,--output", synth_out, "Output directory")->required();
  synth->callback([&] {
    action = [&] {
      const auto entries =
          generate_dataset(synth_identities, synth_samples, synth_seed, synth_out);
      out << "synth: wrote " << entries.size() << " images and " << kManifestName
          << " to " << synth_out << '\n';
      return kOk;
    };
  });

  // Per-stage commands share input/output arguments.
  std::string stage_in;
  std::string stage_out;
  ConfigFlags stage_flags;

  auto* binarize = app.add_subcommand("binarize", "Mean-threshold a grayscale PGM");
  binarize->add_option("input", stage_in, "Grayscale PGM")->required();
  binarize->add_option("-o,--output", stage_out, "Binary PGM (0/255)")->required();
  binarize->callback([&] {
    action = [&] {
      const auto mask = binarize_mean(load_pgm(stage_in));
      save_binary_pgm(stage_out, mask);
      out << "binarize: " << mask.width() << "x" << mask.height() << ", foreground "
          << count_foreground(mask) << '\n';
      return kOk;
    };
  });

  auto* segment = app.add_subcommand(
      "segment", "Binarize, keep the largest 8-connected component and crop");
  segment->add_option("input", stage_in, "Grayscale PGM")->required();
  segment->add_option("-o,--output", stage_out, "Cropped face mask PGM")->required();
  segment->callback([&] {
    action = [&] {
      const auto face = segment_face(load_pgm(stage_in));
      save_binary_pgm(stage_out, face.mask);
      out << "crop " << face.crop.top << ' ' << face.crop.bottom << ' ' << face.crop.left
          << ' ' << face.crop.right << '\n';
      out << "segment: " << face.mask.width() << "x" << face.mask.height()
          << ", foreground " << count_foreground(face.mask) << '\n';
      return kOk;
    };
  });

  auto* perfusion = app.add_subcommand(
      "perfusion", "Erode a face mask and thin it to the perfusion skeleton");
  perfusion->add_option("input", stage_in, "Face mask PGM (0/255)")->required();
  perfusion->add_option("-o,--output", stage_out, "Skeleton PGM")->required();
  add_config_flag(*perfusion, stage_flags);
  stage_flags.add(*perfusion, "--erode-iters", "erode-iters", "Erosion iterations");
  stage_flags.add(*perfusion, "--se", "se", "Structuring element: cross3 | square3");
  perfusion->callback([&] {
    action = [&] {
      const auto cfg = stage_flags.resolve();
      const auto skeleton = extract_perfusion(load_binary_pgm(stage_in), cfg.perfusion);
      save_binary_pgm(stage_out, skeleton);
      out << "perfusion: " << skeleton.width() << "x" << skeleton.height()
          << ", skeleton pixels " << count_foreground(skeleton) << '\n';
      return kOk;
    };
  });

  std::string overlay_out;
  auto* minutiae = app.add_subcommand("minutiae", "Extract and prune skeleton minutiae");
  minutiae->add_option("input", stage_in, "Skeleton PGM (0/255)")->required();
  minutiae->add_option("-o,--output", stage_out, "Minutiae text file")->required();
  minutiae->add_option("--overlay", overlay_out, "Optional overlay PGM");
  add_config_flag(*minutiae, stage_flags);
  stage_flags.add(*minutiae, "--border-margin", "border-margin", "Border margin in px");
  stage_flags.add(*minutiae, "--min-sep", "min-sep", "Minimum separation in px");
  minutiae->callback([&] {
    action = [&] {
      const auto cfg = stage_flags.resolve();
      const auto skeleton = load_binary_pgm(stage_in);
      const auto raw = extract_minutiae(skeleton);
      const auto kept = prune_minutiae(raw, skeleton.width(), skeleton.height(), cfg.prune);
      std::ostringstream text;
      write_minutiae(text, kept);
      write_text(stage_out, text.str());
      if (!overlay_out.empty()) save_pgm(overlay_out, minutiae_overlay(skeleton, kept));
      const auto k = count_kinds(kept);
      const auto r = count_kinds(raw);
      out << "minutiae: " << skeleton.width() << "x" << skeleton.height()
          << ", terminations " << k.terminations << ", bifurcations " << k.bifurcations
          << " (before pruning " << r.terminations << ", " << r.bifurcations << ")\n";
      return kOk;
    };
  });

  // features
  std::string manifest_in;
  std::string features_out;
  unsigned threads = 0;
  ConfigFlags feature_flags;
  auto* features = app.add_subcommand(
      "features", "Run the extraction pipeline over a manifest and write feature CSV");
  features->add_option("manifest", manifest_in, "Manifest CSV (filename,label)")
      ->required()
      ->check(CLI::ExistingFile);
  features->add_option("-o,--output", features_out, "Feature CSV")->required();
  features->add_option("--threads", threads, "Worker threads (0 = all cores)");
  add_config_flag(*features, feature_flags);
  add_pipeline_flags(*features, feature_flags);
  features->callback([&] {
    action = [&] {
      const auto cfg = feature_flags.resolve();
      const auto batch = run_batch(manifest_in, cfg, threads, err);
      const auto rows = batch_features(batch, cfg.grid);
      const auto n = static_cast<std::size_t>(cfg.grid) * static_cast<std::size_t>(cfg.grid);
      save_features(features_out, rows, n);
      out << "features: " << rows.size() << " rows x " << n << " features, "
          << batch.rejects.size() << " rejected of " << batch.attempted << '\n';
      if (batch.too_many_rejects()) {
        err << "error: more than 10% of images failed extraction\n";
        return kDataError;
      }
      return kOk;
    };
  });

  // split
  std::string split_in;
  std::string train_out;
  std::string test_out;
  ConfigFlags split_flags;
  auto* split = app.add_subcommand("split", "Stratified seeded train/test split");
  split->add_option("features", split_in, "Feature CSV")->required()->check(CLI::ExistingFile);
  split->add_option("--train-out", train_out, "Training CSV")->required();
  split->add_option("--test-out", test_out, "Test CSV")->required();
  add_config_flag(*split, split_flags);
  add_split_flags(*split, split_flags);
  split->callback([&] {
    action = [&] {
      const auto cfg = split_flags.resolve();
      const auto table = load_features(split_in);
      const auto s = split_dataset(table.rows, cfg.train_fraction, cfg.split_seed);
      save_features(train_out, s.train, table.feature_count);
      save_features(test_out, s.test, table.feature_count);
      out << "split: " << s.train.size() << " train, " << s.test.size() << " test (seed "
          << cfg.split_seed << ")\n";
      return kOk;
    };
  });

  // train
  std::string train_in;
  std::string model_out;
  ConfigFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "Train the 5-layer tanh MLP");
  train_cmd->add_option("features", train_in, "Training feature CSV")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("-o,--output", model_out, "Model file")->required();
  add_config_flag(*train_cmd, train_flags);
  add_training_flags(*train_cmd, train_flags);
  train_flags.add(*train_cmd, "--seed", "train-seed", "Initialization seed (default 1)");
  train_cmd->callback([&] {
    action = [&] {
      const auto cfg = train_flags.resolve();
      const auto table = load_features(train_in);
      auto result = train(table.rows, cfg.train, cfg.num_classes);
      std::ostringstream text;
      save_model(text, result.model);
      write_text(model_out, text.str());
      echo_config(out, cfg);
      out << "train: " << table.rows.size() << " samples, " << cfg.train.epochs
          << " epochs, final loss "
          << (result.loss_history.empty() ? 0.0 : result.loss_history.back()) << '\n';
      return kOk;
    };
  });

  // predict
  std::string predict_model;
  std::string predict_in;
  std::string predict_out;
  auto* predict_cmd = app.add_subcommand("predict", "Predict a class for each feature row");
  predict_cmd->add_option("model", predict_model, "Model file")
      ->required()
      ->check(CLI::ExistingFile);
  predict_cmd->add_option("features", predict_in, "Feature CSV")
      ->required()
      ->check(CLI::ExistingFile);
  predict_cmd->add_option("-o,--output", predict_out, "Write predictions here instead of stdout");
  predict_cmd->callback([&] {
    action = [&] {
      const auto model = load_model_file(predict_model);
      const auto table = load_features(predict_in);
      check_feature_length(model, table.feature_count);
      std::ostringstream text;
      for (const auto& row : table.rows) text << predict(model, row) << '\n';
      if (predict_out.empty()) {
        out << text.str();
      } else {
        write_text(predict_out, text.str());
        out << "predict: " << table.rows.size() << " predictions written to "
            << predict_out << '\n';
      }
      return kOk;
    };
  });

  // evaluate
  std::vector<std::string> eval_inputs;
  bool sweep = false;
  ConfigFlags eval_flags;
  auto* evaluate_cmd = app.add_subcommand(
      "evaluate",
      "Report accuracy of MODEL on FEATURES, or with --sweep run the full\n"
      "experiment from MANIFEST for grids 8, 16 and 32");
  evaluate_cmd->add_option("inputs", eval_inputs, "MODEL FEATURES | MANIFEST (--sweep)")
      ->required();
  evaluate_cmd->add_flag("--sweep", sweep, "Run extraction, split, training and test per grid");
  evaluate_cmd->add_option("--threads", threads, "Worker threads for --sweep");
  add_config_flag(*evaluate_cmd, eval_flags);
  add_pipeline_flags(*evaluate_cmd, eval_flags);
  add_training_flags(*evaluate_cmd, eval_flags);
  add_split_flags(*evaluate_cmd, eval_flags);
  eval_flags.add(*evaluate_cmd, "--train-seed", "train-seed", "Initialization seed (default 1)");
  evaluate_cmd->callback([&] {
    action = [&] {
      const auto cfg = eval_flags.resolve();
      if (!sweep) {
        if (eval_inputs.size() != 2) throw UsageError("evaluate expects MODEL FEATURES");
        const auto model = load_model_file(eval_inputs[0]);
        const auto table = load_features(eval_inputs[1]);
        check_feature_length(model, table.feature_count);
        const auto ev = evaluate(model, table.rows);
        out << "# model = " << eval_inputs[0] << '\n'
            << "# features = " << eval_inputs[1] << '\n';
        out << "accuracy " << percent(ev.accuracy()) << " (" << ev.correct << "/"
            << ev.total << ")\n";
        print_confusion(out, ev);
        return kOk;
      }
      if (eval_inputs.size() != 1) throw UsageError("evaluate --sweep expects MANIFEST");
      const fs::path manifest = eval_inputs[0];
      if (!fs::is_regular_file(manifest)) {
        throw UsageError("manifest not found: " + manifest.string());
      }
      echo_config(out, cfg);
      const auto batch = run_batch(manifest, cfg, threads, err);
      if (batch.too_many_rejects()) {
        err << "error: more than 10% of images failed extraction\n";
        return kDataError;
      }
      std::vector<ExperimentResult> rows;
      for (int grid : {8, 16, 32}) {
        rows.push_back(run_experiment(batch_features(batch, grid), cfg));
      }
      out << "# images " << batch.images.size() << ", rejected " << batch.rejects.size()
          << ", train " << rows.front().train_size << ", test "
          << rows.front().test_eval.total << '\n';
      out << std::left << std::setw(14) << "No of Block" << "Performance Rate\n";
      for (const auto& r : rows) {
        out << std::left << std::setw(14)
            << (std::to_string(r.grid) + "x" + std::to_string(r.grid))
            << percent(r.test_eval.accuracy()) << '\n';
      }
      return kOk;
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsageError;
  }

  try {
    return action ? action() : kUsageError;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace thermoprint::cli
