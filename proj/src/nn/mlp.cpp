#include "svsp/nn/mlp.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "svsp/core/error.hpp"

namespace svsp::nn {
namespace {

using nlohmann::json;

double activate(double x, Activation a) {
  switch (a) {
    case Activation::kRelu: return x > 0.0 ? x : 0.0;
    case Activation::kTanh: return std::tanh(x);
    case Activation::kLinear: return x;
  }
  return x;
}

Vector numbers(const json& j, const std::string& what) {
  if (!j.is_array()) throw InputError(what + " must be an array");
  Vector v;
  v.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) throw InputError(what + " contains a non-numeric entry");
    v.push_back(x.get<double>());
  }
  return v;
}

}  // namespace

Activation parse_activation(std::string_view tag) {
  if (tag == "relu") return Activation::kRelu;
  if (tag == "tanh") return Activation::kTanh;
  if (tag == "linear") return Activation::kLinear;
  throw InputError("unknown activation '" + std::string(tag) + "'");
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kLinear: return "linear";
  }
  return "linear";
}

MlpNetwork::MlpNetwork(std::vector<DenseLayer> layers, InputKind input_kind, std::optional<Vector> output_scale)
    : layers_(std::move(layers)), input_kind_(input_kind), output_scale_(std::move(output_scale)) {
  if (layers_.empty()) throw InputError("network has no layers");
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& layer = layers_[k];
    if (layer.out_size() == 0 || layer.in_size() == 0)
      throw InputError("layer " + std::to_string(k) + " has an empty weight matrix");
    if (layer.bias.size() != layer.out_size())
      throw InputError("layer " + std::to_string(k) + ": bias length " + std::to_string(layer.bias.size()) +
                       " does not match " + std::to_string(layer.out_size()) + " outputs");
    if (!all_finite(layer.weight.flat()) || !all_finite(layer.bias))
      throw InputError("layer " + std::to_string(k) + " has non-finite weights");
    if (k > 0 && layers_[k - 1].out_size() != layer.in_size())
      throw InputError("dimension chain break: layer " + std::to_string(k - 1) + " outputs " +
                       std::to_string(layers_[k - 1].out_size()) + ", layer " + std::to_string(k) + " expects " +
                       std::to_string(layer.in_size()));
  }
  if (input_kind_ == InputKind::kStateAction && output_size() != 1)
    throw InputError("a state_action network (critic) must have scalar output");
  if (output_scale_) {
    if (output_scale_->size() != output_size())
      throw InputError("output_scale length does not match network output size");
    if (!all_finite(*output_scale_)) throw InputError("output_scale has non-finite entries");
  }
}

Vector MlpNetwork::forward(std::span<const double> input) const {
  if (input.size() != input_size())
    throw InputError("forward: input length " + std::to_string(input.size()) + ", network expects " +
                     std::to_string(input_size()));
  Vector current(input.begin(), input.end());
  Vector next;
  for (const auto& layer : layers_) {
    next.assign(layer.out_size(), 0.0);
    for (std::size_t o = 0; o < layer.out_size(); ++o)
      next[o] = activate(dot(layer.weight.row(o), current) + layer.bias[o], layer.activation);
    current.swap(next);
  }
  if (output_scale_)
    for (std::size_t i = 0; i < current.size(); ++i) current[i] *= (*output_scale_)[i];
  return current;
}

MlpNetwork parse_network(std::string_view json_text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InputError(origin + ": " + e.what());
  }
  try {
    if (!doc.is_object()) throw InputError("weight document must be an object");
    if (!doc.contains("input") || !doc["input"].is_string()) throw InputError("missing string field 'input'");
    const auto kind_tag = doc["input"].get<std::string>();
    InputKind kind;
    if (kind_tag == "state") kind = InputKind::kState;
    else if (kind_tag == "state_action") kind = InputKind::kStateAction;
    else throw InputError("unknown input kind '" + kind_tag + "'");

    if (!doc.contains("layers") || !doc["layers"].is_array()) throw InputError("missing array 'layers'");
    std::vector<DenseLayer> layers;
    std::size_t index = 0;
    for (const auto& jl : doc["layers"]) {
      const std::string prefix = "layer " + std::to_string(index++);
      if (!jl.is_object() || !jl.contains("w") || !jl.contains("b") || !jl.contains("act"))
        throw InputError(prefix + ": expected fields w, b, act");
      if (!jl["act"].is_string()) throw InputError(prefix + ": 'act' must be a string");
      DenseLayer layer;
      layer.activation = parse_activation(jl["act"].get<std::string>());
      const auto& jw = jl["w"];
      if (!jw.is_array() || jw.empty()) throw InputError(prefix + ": 'w' must be a non-empty array of rows");
      for (const auto& jr : jw) {
        auto row = numbers(jr, prefix + " weight row");
        if (layer.weight.rows() > 0 && row.size() != layer.weight.cols())
          throw InputError(prefix + ": ragged weight matrix");
        layer.weight.append_row(row);
      }
      layer.bias = numbers(jl["b"], prefix + " bias");
      layers.push_back(std::move(layer));
    }
    std::optional<Vector> scale;
    if (doc.contains("output_scale") && !doc["output_scale"].is_null())
      scale = numbers(doc["output_scale"], "output_scale");
    return MlpNetwork(std::move(layers), kind, std::move(scale));
  } catch (const InputError& e) {
    throw InputError(origin + ": " + e.what());
  } catch (const json::exception& e) {
    throw InputError(origin + ": " + e.what());
  }
}

MlpNetwork load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open network file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_network(ss.str(), path.string());
}

void save_network(const MlpNetwork& net, const std::filesystem::path& path) {
  nlohmann::ordered_json doc;
  doc["input"] = net.input_kind() == InputKind::kState ? "state" : "state_action";
  if (net.output_scale()) doc["output_scale"] = *net.output_scale();
  auto layers = nlohmann::ordered_json::array();
  for (const auto& layer : net.layers()) {
    nlohmann::ordered_json jl;
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < layer.weight.rows(); ++r) {
      auto row = layer.weight.row(r);
      rows.push_back(Vector(row.begin(), row.end()));
    }
    jl["w"] = std::move(rows);
    jl["b"] = layer.bias;
    jl["act"] = std::string(to_string(layer.activation));
    layers.push_back(std::move(jl));
  }
  doc["layers"] = std::move(layers);
  std::ofstream out(path);
  if (!out) throw InputError("cannot write network file " + path.string());
  out << doc.dump() << '\n';
}

std::vector<ForwardFixture> load_fixtures(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open fixture file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  const json& pairs = doc.is_object() && doc.contains("pairs") ? doc["pairs"] : doc;
  if (!pairs.is_array()) throw InputError(path.string() + ": expected an array of pairs");
  std::vector<ForwardFixture> out;
  for (const auto& p : pairs) {
    if (!p.is_object() || !p.contains("input") || !p.contains("output"))
      throw InputError(path.string() + ": each pair needs 'input' and 'output'");
    out.push_back({numbers(p["input"], "fixture input"), numbers(p["output"], "fixture output")});
  }
  return out;
}

}  // namespace svsp::nn
