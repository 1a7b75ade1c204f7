#include "tactile/train/loss.hpp"

#include <cmath>

#include "tactile/error.hpp"

namespace tactile::train {

namespace {

template <typename T>
void require_finite(const nn::Tensor<T>& t, const char* what) {
  for (T v : t.values()) {
    if (!std::isfinite(v)) throw Error(ErrorKind::Numeric, std::string(what) + " contains a non-finite value");
  }
}

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

template <typename T>
double bce_with_logits(const nn::Tensor<T>& logits, int label, nn::Tensor<T>* grad) {
  if (logits.empty()) throw Error(ErrorKind::Shape, "BCE of an empty tensor");
  const double n = static_cast<double>(logits.size());
  if (grad) *grad = nn::Tensor<T>(logits.shape());
  double sum = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double z = logits[i];
    // label 1: softplus(-z); label 0: softplus(z)
    sum += label ? softplus(-z) : softplus(z);
    if (grad) (*grad)[i] = static_cast<T>((label ? -sigmoid(-z) : sigmoid(z)) / n);
  }
  return sum / n;
}

template <typename T>
double l1_loss(const nn::Tensor<T>& prediction, const nn::Tensor<T>& target, nn::Tensor<T>* grad) {
  if (!(prediction.shape() == target.shape())) {
    throw Error(ErrorKind::Shape, "L1 shapes differ: " + prediction.shape().str() + " vs " +
                                      target.shape().str());
  }
  const double n = static_cast<double>(prediction.size());
  if (grad) *grad = nn::Tensor<T>(prediction.shape());
  double sum = 0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const double d = static_cast<double>(prediction[i]) - static_cast<double>(target[i]);
    sum += std::abs(d);
    if (grad) (*grad)[i] = static_cast<T>((d > 0 ? 1.0 : d < 0 ? -1.0 : 0.0) / n);
  }
  return sum / n;
}

template <typename T>
Pix2PixLoss<T> pix2pix_loss(const nn::Tensor<T>& d_real, const nn::Tensor<T>& d_fake,
                            const nn::Tensor<T>& gen_out, const nn::Tensor<T>& target,
                            double lambda_l1, bool gradients) {
  if (!(lambda_l1 >= 0) || !std::isfinite(lambda_l1)) {
    throw Error(ErrorKind::Numeric, "lambda_l1 must be finite and non-negative");
  }
  if (!(d_real.shape() == d_fake.shape())) {
    throw Error(ErrorKind::Shape, "real and fake score maps differ: " + d_real.shape().str() +
                                      " vs " + d_fake.shape().str());
  }
  require_finite(d_real, "real logits");
  require_finite(d_fake, "fake logits");
  require_finite(gen_out, "generator output");
  require_finite(target, "target");

  Pix2PixLoss<T> r;
  nn::Tensor<T>* none = nullptr;
  const double real_term = bce_with_logits(d_real, 1, gradients ? &r.grad_d_real : none);
  const double fake_term = bce_with_logits(d_fake, 0, gradients ? &r.grad_d_fake : none);
  r.d_loss = 0.5 * (real_term + fake_term);
  if (gradients) {
    for (auto& v : r.grad_d_real.values()) v *= T(0.5);
    for (auto& v : r.grad_d_fake.values()) v *= T(0.5);
  }
  r.g_adv = bce_with_logits(d_fake, 1, gradients ? &r.grad_g_fake : none);
  r.g_l1 = l1_loss(gen_out, target, gradients ? &r.grad_gen : none);
  r.g_loss = r.g_adv + lambda_l1 * r.g_l1;
  if (gradients) {
    for (auto& v : r.grad_gen.values()) v = static_cast<T>(v * lambda_l1);
  }
  return r;
}

template double bce_with_logits(const nn::Tensor<float>&, int, nn::Tensor<float>*);
template double bce_with_logits(const nn::Tensor<double>&, int, nn::Tensor<double>*);
template double l1_loss(const nn::Tensor<float>&, const nn::Tensor<float>&, nn::Tensor<float>*);
template double l1_loss(const nn::Tensor<double>&, const nn::Tensor<double>&, nn::Tensor<double>*);
template Pix2PixLoss<float> pix2pix_loss(const nn::Tensor<float>&, const nn::Tensor<float>&,
                                         const nn::Tensor<float>&, const nn::Tensor<float>&,
                                         double, bool);
template Pix2PixLoss<double> pix2pix_loss(const nn::Tensor<double>&, const nn::Tensor<double>&,
                                          const nn::Tensor<double>&, const nn::Tensor<double>&,
                                          double, bool);

}  // namespace tactile::train
