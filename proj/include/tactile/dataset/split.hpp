#pragma once

#include <cstdint>
#include <vector>

#include "tactile/dataset/io.hpp"

namespace tactile::dataset {

struct SplitPolicy {
  int train = 5000;
  int test = 500;
  std::uint64_t seed = 0;
};

// Assigns Train / TestEnglish by a seeded shuffle of the records that are
// not already flagged TestWorld. World records keep their flag; leftovers
// become Unassigned. Output order follows the input.
std::vector<ManifestRecord> split_dataset(std::vector<ManifestRecord> records,
                                          const SplitPolicy& policy);

}  // namespace tactile::dataset
