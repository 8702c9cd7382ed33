#include "svsp/core/labels.hpp"

#include "svsp/core/error.hpp"

namespace svsp {

RegionLabels::RegionLabels(std::vector<std::uint8_t> labels) : labels_(std::move(labels)) {
  for (auto l : labels_) {
    if (l > 1) throw InputError("region labels must be 0 or 1");
    positive_count_ += l;
  }
}

}  // namespace svsp
