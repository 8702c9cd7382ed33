#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace svsp {

// Per-row region labels: 1 = the current subpolicy is good enough here,
// 0 = defer to a deeper node.
class RegionLabels {
 public:
  RegionLabels() = default;
  explicit RegionLabels(std::vector<std::uint8_t> labels);

  const std::vector<std::uint8_t>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  std::size_t positive_count() const { return positive_count_; }
  std::size_t negative_count() const { return labels_.size() - positive_count_; }
  bool operator[](std::size_t i) const { return labels_[i] != 0; }

 private:
  std::vector<std::uint8_t> labels_;
  std::size_t positive_count_ = 0;
};

}  // namespace svsp
