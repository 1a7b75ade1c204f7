#include "tactile/train/adam.hpp"

#include <algorithm>
#include <cmath>

#include "tactile/error.hpp"

namespace tactile::train {

Adam::Adam(std::vector<nn::Parameter<float>*> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  if (!(cfg_.lr >= 0) || !(cfg_.beta1 >= 0 && cfg_.beta1 < 1) ||
      !(cfg_.beta2 >= 0 && cfg_.beta2 < 1) || !(cfg_.eps > 0)) {
    throw Error(ErrorKind::Config, "Adam needs lr >= 0, betas in [0,1) and eps > 0");
  }
  for (const auto* p : params_) {
    m_.emplace_back(p->size(), 0.0f);
    v_.emplace_back(p->size(), 0.0f);
  }
}

void Adam::zero_grad() {
  for (auto* p : params_) p->zero_grad();
}

void Adam::step() {
  ++t_;
  const double b1 = cfg_.beta1, b2 = cfg_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const float step = static_cast<float>(cfg_.lr / c1);
  const float inv_c2 = static_cast<float>(1.0 / c2);
  const float fb1 = static_cast<float>(b1), fb2 = static_cast<float>(b2);
  const float eps = static_cast<float>(cfg_.eps);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& p = *params_[k];
    float* m = m_[k].data();
    float* v = v_[k].data();
    const std::size_t n = p.size();
#pragma omp parallel for schedule(static) if (n > 65536)
    for (std::size_t i = 0; i < n; ++i) {
      const float g = p.grad[i];
      m[i] = fb1 * m[i] + (1.0f - fb1) * g;
      v[i] = fb2 * v[i] + (1.0f - fb2) * g * g;
      const float delta = step * m[i] / (std::sqrt(v[i] * inv_c2) + eps);
      if (delta != 0.0f) p.value[i] -= delta;
    }
  }
}

void Adam::export_state(const std::string& prefix, std::vector<gan::NamedArray>& out) const {
  for (std::size_t k = 0; k < params_.size(); ++k) {
    out.push_back({prefix + ".m." + params_[k]->name, params_[k]->dims, m_[k]});
    out.push_back({prefix + ".v." + params_[k]->name, params_[k]->dims, v_[k]});
  }
}

void Adam::import_state(const std::string& prefix, const gan::Checkpoint& ckpt, std::int64_t steps) {
  for (std::size_t k = 0; k < params_.size(); ++k) {
    const auto& m = ckpt.array(prefix + ".m." + params_[k]->name);
    const auto& v = ckpt.array(prefix + ".v." + params_[k]->name);
    if (m.values.size() != m_[k].size() || v.values.size() != v_[k].size()) {
      throw Error(ErrorKind::Checkpoint, "optimizer state for " + params_[k]->name + " has the wrong size");
    }
    m_[k] = m.values;
    v_[k] = v.values;
  }
  t_ = steps;
}

}  // namespace tactile::train
