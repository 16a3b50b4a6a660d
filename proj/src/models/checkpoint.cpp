#include "rssi/models/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rssi/error.hpp"

namespace rssi {

using nlohmann::json;

namespace {

json to_array(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  json a = json::array();
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) a.push_back(m(i, j));
  return a;
}

[[noreturn]] void fail(const std::string& what) { throw FormatError("checkpoint: " + what); }

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(std::string("missing field '") + key + "'");
  return j.at(key);
}

Index get_index(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    fail(std::string("field '") + key + "' must be a non-negative integer");
  }
  return static_cast<Index>(v.get<long long>());
}

Eigen::MatrixXd from_array(const json& a, Index rows, Index cols, const std::string& what) {
  if (!a.is_array() || static_cast<Index>(a.size()) != rows * cols) {
    fail(what + " holds " + std::to_string(a.is_array() ? a.size() : 0) +
         " values, topology needs " + std::to_string(rows * cols));
  }
  Eigen::MatrixXd m(rows, cols);
  Index k = 0;
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i, ++k) {
      const json& v = a[static_cast<std::size_t>(k)];
      if (!v.is_number()) fail(what + " contains a non-number");
      m(i, j) = v.get<double>();
    }
  return m;
}

json stats_json(const StandardizationStats<double>& s) {
  return {{"mean", to_array(s.mean)}, {"stddev", to_array(s.stddev)}};
}

StandardizationStats<double> stats_from(const json& j, Index dim) {
  StandardizationStats<double> s;
  s.mean = from_array(field(j, "mean"), dim, 1, "standardization.mean");
  s.stddev = from_array(field(j, "stddev"), dim, 1, "standardization.stddev");
  if (!(s.stddev.array() > 0.0).all()) fail("standardization.stddev must be positive");
  return s;
}

json mlp_topology(const MlpNetwork<double>& net) {
  json layers = json::array();
  for (const auto& l : net.layers) {
    layers.push_back({{"in", l.in_dim()}, {"out", l.out_dim()},
                      {"activation", to_string(l.activation)}});
  }
  return {{"input_dim", net.input_dim}, {"layers", layers}};
}

json mlp_parameters(const MlpNetwork<double>& net) {
  json layers = json::array();
  for (const auto& l : net.layers) {
    layers.push_back({{"weights", to_array(l.weights)}, {"biases", to_array(l.biases)}});
  }
  return layers;
}

MlpNetwork<double> mlp_from(const json& topo, const json& params) {
  MlpNetwork<double> net;
  net.input_dim = get_index(topo, "input_dim");
  const json& layers = field(topo, "layers");
  if (!layers.is_array() || !params.is_array() || layers.size() != params.size()) {
    fail("layer list in topology and parameters differ in length");
  }
  for (std::size_t t = 0; t < layers.size(); ++t) {
    const Index in = get_index(layers[t], "in");
    const Index out = get_index(layers[t], "out");
    const std::string act = field(layers[t], "activation").get<std::string>();
    DenseLayer<double> l;
    if (act == "relu") {
      l.activation = Activation::ReLU;
    } else if (act == "linear") {
      l.activation = Activation::Linear;
    } else {
      fail("unknown activation '" + act + "'");
    }
    const std::string where = "layer " + std::to_string(t);
    l.weights = from_array(field(params[t], "weights"), out, in, where + " weights");
    l.biases = from_array(field(params[t], "biases"), out, 1, where + " biases");
    net.layers.push_back(std::move(l));
  }
  try {
    net.validate();
  } catch (const ShapeError& e) {
    fail(e.what());
  }
  if (net.output_dim() != 1) fail("network must end in a single output");
  return net;
}

template <typename Net>
json recurrent_topology(const Net& n) {
  return {{"step_dim", n.step_dim()}, {"hidden", n.hidden()}, {"window", n.window}};
}

template <typename Net>
json recurrent_parameters(const Net& n) {
  return {{"w_input", to_array(n.w_input)},
          {"w_recurrent", to_array(n.w_recurrent)},
          {"bias", to_array(n.bias)},
          {"readout", to_array(n.readout)},
          {"readout_bias", n.readout_bias}};
}

template <typename Net>
Net recurrent_from(const json& topo, const json& params, Index gates) {
  Net n;
  const Index d = get_index(topo, "step_dim");
  const Index h = get_index(topo, "hidden");
  n.window = get_index(topo, "window");
  if (d < 1 || h < 1 || n.window < 1) fail("recurrent dimensions must be positive");
  n.w_input = from_array(field(params, "w_input"), gates * h, d, "w_input");
  n.w_recurrent = from_array(field(params, "w_recurrent"), gates * h, h, "w_recurrent");
  n.bias = from_array(field(params, "bias"), gates * h, 1, "bias");
  n.readout = from_array(field(params, "readout"), 1, h, "readout");
  const json& rb = field(params, "readout_bias");
  if (!rb.is_number()) fail("readout_bias must be a number");
  n.readout_bias = rb.get<double>();
  return n;
}

struct ToJson {
  json& topo;
  json& params;
  json& stats;
  void operator()(const FeatureAnnModel& m) const {
    topo = mlp_topology(m.net);
    params = mlp_parameters(m.net);
    stats = stats_json(m.input_stats);
  }
  void operator()(const SequenceAnnModel& m) const {
    topo = mlp_topology(m.net);
    topo["dropout_rate"] = m.dropout_rate;
    params = mlp_parameters(m.net);
    stats = stats_json(m.input_stats);
  }
  void operator()(const OlsModel& m) const {
    topo = {{"design", {"s", "c", "g==1", "g==2"}}};
    params = {{"coefficients", to_array(m.coefficients)}, {"intercept", m.intercept}};
    stats = nullptr;
  }
  void operator()(const RnnModel& m) const {
    topo = recurrent_topology(m.net);
    params = recurrent_parameters(m.net);
    stats = stats_json(m.input_stats);
  }
  void operator()(const LstmModel& m) const {
    topo = recurrent_topology(m.net);
    params = recurrent_parameters(m.net);
    stats = stats_json(m.input_stats);
  }
};

}  // namespace

std::string hash_json(const json& j) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json checkpoint_to_json(const Checkpoint& ckpt) {
  json topo, params, stats;
  std::visit(ToJson{topo, params, stats}, ckpt.model);
  json j = {{"format", kCheckpointFormat},
            {"version", kCheckpointVersion},
            {"kind", std::string(model_kind_name(kind_of(ckpt.model)))},
            {"topology", topo},
            {"parameters", params},
            {"standardization", stats},
            {"train_config", ckpt.train_config},
            {"config_hash", ckpt.config_hash}};
  if (ckpt.sequence_key) {
    j["sequence_key"] = {ckpt.sequence_key->s, ckpt.sequence_key->c, ckpt.sequence_key->g};
  } else {
    j["sequence_key"] = nullptr;
  }
  return j;
}

Checkpoint checkpoint_from_json(const json& j, std::optional<ModelKind> expected_kind) {
  try {
    if (field(j, "format") != kCheckpointFormat) fail("not an estimator checkpoint");
    if (field(j, "version") != kCheckpointVersion) {
      fail("unsupported version " + field(j, "version").dump());
    }
    ModelKind kind;
    try {
      kind = parse_model_kind(field(j, "kind").get<std::string>());
    } catch (const ValueError& e) {
      fail(e.what());
    }
    if (expected_kind && *expected_kind != kind) {
      fail("topology mismatch: expected a " +
           std::string(model_kind_name(*expected_kind)) + " model, file holds " +
           std::string(model_kind_name(kind)));
    }
    const json& topo = field(j, "topology");
    const json& params = field(j, "parameters");
    Checkpoint c;
    switch (kind) {
      case ModelKind::FeatureAnn: {
        FeatureAnnModel m{mlp_from(topo, params), {}};
        if (m.net.input_dim != kFeatureInputs) fail("feature model must take 3 inputs");
        m.input_stats = stats_from(field(j, "standardization"), m.net.input_dim);
        c.model = std::move(m);
        break;
      }
      case ModelKind::SequenceAnn: {
        SequenceAnnModel m;
        m.net = mlp_from(topo, params);
        m.dropout_rate = field(topo, "dropout_rate").get<double>();
        if (!(m.dropout_rate >= 0.0 && m.dropout_rate < 1.0)) fail("dropout_rate out of range");
        m.input_stats = stats_from(field(j, "standardization"), m.net.input_dim);
        c.model = std::move(m);
        break;
      }
      case ModelKind::Ols: {
        OlsModel m;
        m.coefficients = from_array(field(params, "coefficients"), 4, 1, "coefficients");
        m.intercept = field(params, "intercept").get<double>();
        c.model = std::move(m);
        break;
      }
      case ModelKind::Rnn: {
        RnnModel m;
        m.net = recurrent_from<RnnNetwork<double>>(topo, params, 1);
        m.input_stats = stats_from(field(j, "standardization"), m.net.input_rows());
        c.model = std::move(m);
        break;
      }
      case ModelKind::Lstm: {
        LstmModel m;
        m.net = recurrent_from<LstmNetwork<double>>(topo, params, 4);
        m.input_stats = stats_from(field(j, "standardization"), m.net.input_rows());
        c.model = std::move(m);
        break;
      }
    }
    if (j.contains("train_config")) c.train_config = j.at("train_config");
    if (j.contains("config_hash") && j.at("config_hash").is_string()) {
      c.config_hash = j.at("config_hash").get<std::string>();
    }
    if (j.contains("sequence_key") && j.at("sequence_key").is_array()) {
      const json& k = j.at("sequence_key");
      if (k.size() != 3) fail("sequence_key must have 3 entries");
      c.sequence_key = FeatureTriple{k[0].get<double>(), k[1].get<int>(), k[2].get<int>()};
    }
    return c;
  } catch (const json::exception& e) {
    fail(e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write checkpoint: " + path.string());
  out << checkpoint_to_json(ckpt).dump(1) << '\n';
  if (!out) throw FormatError("error while writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path,
                           std::optional<ModelKind> expected_kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read checkpoint: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
  }
  return checkpoint_from_json(j, expected_kind);
}

}  // namespace rssi
