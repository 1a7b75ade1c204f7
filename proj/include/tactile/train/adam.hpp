#pragma once

#include <cstdint>
#include <vector>

#include "tactile/gan/checkpoint.hpp"
#include "tactile/nn/tensor.hpp"

namespace tactile::train {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction over a fixed parameter list.
class Adam {
 public:
  Adam(std::vector<nn::Parameter<float>*> params, AdamConfig cfg);

  void zero_grad();
  void step();
  std::int64_t steps() const noexcept { return t_; }
  const AdamConfig& config() const noexcept { return cfg_; }

  // Moments as "<prefix>.m.<param>" / "<prefix>.v.<param>" arrays.
  void export_state(const std::string& prefix, std::vector<gan::NamedArray>& out) const;
  void import_state(const std::string& prefix, const gan::Checkpoint& ckpt, std::int64_t steps);

 private:
  std::vector<nn::Parameter<float>*> params_;
  AdamConfig cfg_;
  std::vector<std::vector<float>> m_, v_;
  std::int64_t t_ = 0;
};

}  // namespace tactile::train
