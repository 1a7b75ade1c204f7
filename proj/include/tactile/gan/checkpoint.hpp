#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "tactile/nn/tensor.hpp"

namespace tactile::gan {

// Binary layout, little-endian:
//   0   magic "TMAPCKPT"
//   8   u32 format version
//   12  u32 reserved (0)
//   16  i64 unix timestamp of the write
//   24  u64 metadata length L, then L bytes of JSON
//   ..  u32 array count, then per array:
//         u32 name length, name, u32 rank, rank x i32 dims, u64 count, count x f32
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::size_t kCheckpointTimestampOffset = 16;

struct NamedArray {
  std::string name;
  std::vector<int> dims;
  std::vector<float> values;
  friend bool operator==(const NamedArray&, const NamedArray&) = default;
};

struct Checkpoint {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<NamedArray> arrays;
  std::int64_t timestamp = 0;

  const NamedArray& array(const std::string& name) const;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

// Stamps the current time unless `timestamp` is already set.
void save_checkpoint(const std::filesystem::path& path, Checkpoint ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

NamedArray to_named_array(const nn::Parameter<float>& p, bool gradient = false);
// Copies values into `p`, checking name and dims.
void assign(nn::Parameter<float>& p, const NamedArray& a);

}  // namespace tactile::gan
