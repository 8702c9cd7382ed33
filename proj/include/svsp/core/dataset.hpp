#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "svsp/core/matrix.hpp"

namespace svsp {

struct DatasetManifest {
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  Vector action_low;
  Vector action_high;
  std::size_t episode_count = 0;
  std::vector<std::string> feature_names;  // empty when absent
  std::vector<std::string> action_names;

  void validate() const;
};

// Recorded teacher states and actions. Construct through make_dataset or
// load_dataset so the invariants hold: equal row counts, N >= 1, finite
// entries, actions clamped into [action_low, action_high].
struct TransitionDataset {
  Matrix states;   // N x d_s
  Matrix actions;  // N x d_a
  Vector action_low;
  Vector action_high;

  std::size_t size() const { return states.rows(); }
  std::size_t state_dim() const { return states.cols(); }
  std::size_t action_dim() const { return actions.cols(); }
};

TransitionDataset make_dataset(Matrix states, Matrix actions, Vector action_low, Vector action_high);

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

TransitionDataset load_dataset(const std::filesystem::path& data_path,
                               const std::filesystem::path& manifest_path);
TransitionDataset load_dataset(const std::filesystem::path& data_path, const DatasetManifest& manifest);

// Header `s0..s{d_s-1},a0..a{d_a-1}`, values printed with 17 significant digits.
void save_dataset(const TransitionDataset& dataset, const std::filesystem::path& data_path);

DatasetManifest manifest_for(const TransitionDataset& dataset, std::size_t episode_count = 0);

// Locale-independent "%.17g".
std::string format_double(double value);

}  // namespace svsp
