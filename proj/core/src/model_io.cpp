#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "thermoprint/errors.hpp"
#include "thermoprint/mlp.hpp"

namespace thermoprint {

namespace {

constexpr std::string_view kMagic = "thermoprint-mlp";
constexpr int kFormatVersion = 1;

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string token(std::string_view what) {
    std::string t;
    if (!(in_ >> t)) throw FormatError("model file ends before " + std::string(what));
    return t;
  }

  void expect(std::string_view keyword) {
    const auto t = token(keyword);
    if (t != keyword) {
      throw FormatError("model file: expected '" + std::string(keyword) + "', got '" +
                        t + "'");
    }
  }

  double real(std::string_view what) {
    const auto t = token(what);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size()) {
      throw FormatError("model file: bad number for " + std::string(what) + ": '" + t + "'");
    }
    return v;
  }

  template <typename T>
  T integer(std::string_view what) {
    const auto t = token(what);
    T v{};
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size()) {
      throw FormatError("model file: bad integer for " + std::string(what) + ": '" + t + "'");
    }
    return v;
  }

 private:
  std::istream& in_;
};

}  // namespace

void save_model(std::ostream& out, const MlpModel& model) {
  model.validate();
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "layer_dims " << model.layer_dims.size();
  for (auto d : model.layer_dims) out << ' ' << d;
  out << '\n';
  out << "input_scale " << format_double(model.input_scale) << '\n';
  out << "activation tanh\n";
  const auto& cfg = model.config;
  out << "learning_rate " << format_double(cfg.learning_rate) << '\n'
      << "momentum " << format_double(cfg.momentum) << '\n'
      << "epochs " << cfg.epochs << '\n'
      << "batch_mode " << to_string(cfg.batch_mode) << '\n'
      << "init_scale " << format_double(cfg.init_scale) << '\n'
      << "seed " << cfg.seed << '\n';
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    const auto& l = model.layers[k];
    out << "layer " << k << ' ' << l.outputs << ' ' << l.inputs << '\n';
    out << "weights\n";
    for (int o = 0; o < l.outputs; ++o) {
      for (int i = 0; i < l.inputs; ++i) {
        if (i) out << ' ';
        out << format_double(l.weight(o, i));
      }
      out << '\n';
    }
    out << "biases\n";
    for (std::size_t o = 0; o < l.biases.size(); ++o) {
      if (o) out << ' ';
      out << format_double(l.biases[o]);
    }
    out << '\n';
  }
  out << "end\n";
}

MlpModel load_model(std::istream& in) {
  Reader r(in);
  r.expect(kMagic);
  const int version = r.integer<int>("format version");
  if (version != kFormatVersion) {
    throw FormatError("unsupported model format version " + std::to_string(version));
  }
  r.expect("layer_dims");
  const auto n = r.integer<std::size_t>("layer count");
  if (n != MlpModel::kLayerDims) {
    throw ShapeError("model file declares " + std::to_string(n) + " layers, expected 5");
  }
  std::vector<int> dims(n);
  for (auto& d : dims) d = r.integer<int>("layer dim");
  MlpModel model = make_zero_model(dims);

  r.expect("input_scale");
  model.input_scale = r.real("input_scale");
  r.expect("activation");
  if (r.token("activation") != "tanh") throw FormatError("only tanh activation is supported");
  r.expect("learning_rate");
  model.config.learning_rate = r.real("learning_rate");
  r.expect("momentum");
  model.config.momentum = r.real("momentum");
  r.expect("epochs");
  model.config.epochs = r.integer<int>("epochs");
  r.expect("batch_mode");
  model.config.batch_mode = parse_batch_mode(r.token("batch_mode"));
  r.expect("init_scale");
  model.config.init_scale = r.real("init_scale");
  r.expect("seed");
  model.config.seed = r.integer<std::uint64_t>("seed");

  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    auto& l = model.layers[k];
    r.expect("layer");
    const auto index = r.integer<std::size_t>("layer index");
    const int outputs = r.integer<int>("layer outputs");
    const int inputs = r.integer<int>("layer inputs");
    if (index != k || outputs != l.outputs || inputs != l.inputs) {
      throw ShapeError("layer " + std::to_string(k) + " header does not match layer_dims");
    }
    r.expect("weights");
    for (auto& w : l.weights) w = r.real("weight");
    r.expect("biases");
    for (auto& b : l.biases) b = r.real("bias");
  }
  r.expect("end");
  model.validate();
  return model;
}

}  // namespace thermoprint
