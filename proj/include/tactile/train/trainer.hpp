#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "tactile/augment/augment.hpp"
#include "tactile/gan/checkpoint.hpp"
#include "tactile/gan/config.hpp"
#include "tactile/gan/networks.hpp"
#include "tactile/kv_config.hpp"
#include "tactile/map_pair.hpp"
#include "tactile/train/adam.hpp"

namespace tactile::train {

struct TrainConfig {
  int epochs = 125;
  int batch_size = 1;
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double lambda_l1 = 100.0;
  std::uint64_t seed = 0;
  std::vector<int> zoom_set{16};
  int checkpoint_every = 1;  // epochs; the final epoch is always saved
  bool augment = true;
  double init_std = 0.02;
  gan::GeneratorConfig generator;
  gan::DiscriminatorConfig discriminator;
  augment::AugmentParams augmentation;

  void validate() const;
  ModelId model_id() const;
  bool recolor_enabled() const;  // 18 in the zoom set
};

// Keys: epochs, batch_size, lr, beta1, beta2, lambda_l1, seed, zoom_set,
// checkpoint_every, augment, init_std, g.*, d.*, aug.*. Unknown keys throw.
void apply_key_values(TrainConfig& cfg, const KeyValues& kv);
KeyValues to_key_values(const TrainConfig& cfg);

struct StepRecord {
  int epoch = 0;
  std::int64_t step = 0;
  double d_loss = 0;
  double g_loss = 0;
  double g_adv = 0;
  double g_l1 = 0;
};
std::string render_step_record(const StepRecord& r);
StepRecord parse_step_record(const std::string& line);

struct TrainOptions {
  std::filesystem::path checkpoint_dir;  // empty: no checkpoints
  std::filesystem::path log_path;        // empty: no loss log
  std::string manifest_hash;
  std::function<void(const StepRecord&)> on_step;
  std::function<void(int epoch, double mean_l1)> on_epoch;
};

struct TrainRun {
  ModelId model_id = ModelId::Zoom16;
  std::vector<StepRecord> steps;
  std::vector<std::filesystem::path> checkpoints;
  std::string manifest_hash;
  std::uint64_t recolor_draws = 0;
  std::uint64_t recolor_applied = 0;
  std::size_t pairs_used = 0;
};

// Generator, discriminator and their optimizers.
class Pix2Pix {
 public:
  explicit Pix2Pix(const TrainConfig& cfg);

  gan::Generator<float>& generator() noexcept { return g_; }
  gan::Discriminator<float>& discriminator() noexcept { return d_; }
  Adam& optimizer_g() noexcept { return opt_g_; }
  Adam& optimizer_d() noexcept { return opt_d_; }

  // One alternating update on a batch; returns the losses before the update.
  StepRecord step(const nn::Tensor<float>& source, const nn::Tensor<float>& target, double lambda_l1);

  gan::Checkpoint checkpoint(nlohmann::json meta) const;
  void restore(const gan::Checkpoint& ckpt);

 private:
  gan::Generator<float> g_;
  gan::Discriminator<float> d_;
  Adam opt_g_;
  Adam opt_d_;
};

TrainRun train(const TrainConfig& cfg, const std::vector<MapPair>& pairs,
               const TrainOptions& options = {});

// Images to [-1, 1] tensors (x / 127.5 - 1) and back (rounding, clamped).
nn::Tensor<float> to_tensor(const RgbImage& image);
nn::Tensor<float> to_batch(const std::vector<const RgbImage*>& images);
RgbImage from_tensor(const nn::Tensor<float>& t, int batch_index = 0);

inline constexpr const char* kCheckpointFormat = "tactile-pix2pix";
inline constexpr int kCheckpointSchema = 1;

// Generator-only view of a checkpoint.
class InferenceModel {
 public:
  static InferenceModel load(const std::filesystem::path& path);
  static InferenceModel from_checkpoint(const gan::Checkpoint& ckpt);

  RgbImage run(const RgbImage& source);
  ModelId model_id() const noexcept { return model_; }
  const gan::GeneratorConfig& config() const noexcept { return g_.config(); }

 private:
  InferenceModel(gan::Generator<float> g, ModelId model) : g_(std::move(g)), model_(model) {}
  gan::Generator<float> g_;
  ModelId model_;
};

RgbImage infer(const std::filesystem::path& checkpoint, const RgbImage& source);

}  // namespace tactile::train
