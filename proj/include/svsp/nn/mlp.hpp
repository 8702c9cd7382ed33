#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "svsp/core/matrix.hpp"

namespace svsp::nn {

enum class Activation { kRelu, kTanh, kLinear };
enum class InputKind { kState, kStateAction };

Activation parse_activation(std::string_view tag);
std::string_view to_string(Activation a);

struct DenseLayer {
  Matrix weight;  // out x in, row-major
  Vector bias;    // out
  Activation activation = Activation::kLinear;

  std::size_t in_size() const { return weight.cols(); }
  std::size_t out_size() const { return weight.rows(); }
};

// Forward-only feed-forward network. Immutable after construction;
// forward() is pure and safe to call from several threads.
class MlpNetwork {
 public:
  MlpNetwork(std::vector<DenseLayer> layers, InputKind input_kind,
             std::optional<Vector> output_scale = std::nullopt);

  Vector forward(std::span<const double> input) const;

  std::size_t input_size() const { return layers_.front().in_size(); }
  std::size_t output_size() const { return layers_.back().out_size(); }
  InputKind input_kind() const { return input_kind_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  const std::optional<Vector>& output_scale() const { return output_scale_; }

 private:
  std::vector<DenseLayer> layers_;
  InputKind input_kind_;
  std::optional<Vector> output_scale_;
};

MlpNetwork load_network(const std::filesystem::path& path);
MlpNetwork parse_network(std::string_view json_text, const std::string& origin = "<memory>");
void save_network(const MlpNetwork& net, const std::filesystem::path& path);

struct ForwardFixture {
  Vector input;
  Vector output;
};

// Companion document of {"input": [...], "output": [...]} pairs, either as a
// top-level array or under a "pairs" key.
std::vector<ForwardFixture> load_fixtures(const std::filesystem::path& path);

}  // namespace svsp::nn
