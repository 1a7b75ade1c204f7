#include "tactile/dataset/split.hpp"

#include <numeric>
#include <set>

#include "tactile/error.hpp"
#include "tactile/random.hpp"

namespace tactile::dataset {

std::vector<ManifestRecord> split_dataset(std::vector<ManifestRecord> records,
                                          const SplitPolicy& policy) {
  if (policy.train < 0 || policy.test < 0) {
    throw Error(ErrorKind::Config, "split counts must be non-negative");
  }
  std::set<std::string> ids;
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!ids.insert(records[i].id).second) {
      throw Error(ErrorKind::Format, "duplicate pair id '" + records[i].id + "'");
    }
    if (records[i].split != Split::TestWorld) pool.push_back(i);
  }
  const auto wanted = static_cast<std::size_t>(policy.train) + static_cast<std::size_t>(policy.test);
  if (wanted > pool.size()) {
    throw Error(ErrorKind::Config, "split asks for " + std::to_string(policy.train) + " train + " +
                                       std::to_string(policy.test) + " test pairs but only " +
                                       std::to_string(pool.size()) + " are available");
  }
  Rng rng(policy.seed);
  rng.shuffle(pool.begin(), pool.end());
  for (std::size_t k = 0; k < pool.size(); ++k) {
    Split s = Split::Unassigned;
    if (k < static_cast<std::size_t>(policy.train)) {
      s = Split::Train;
    } else if (k < wanted) {
      s = Split::TestEnglish;
    }
    records[pool[k]].split = s;
  }
  return records;
}

}  // namespace tactile::dataset
