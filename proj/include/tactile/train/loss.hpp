#pragma once

#include "tactile/nn/tensor.hpp"

namespace tactile::train {

// Mean binary cross-entropy of logits against a constant label (0 or 1),
// computed stably. When `grad` is non-null it receives dLoss/dlogits.
template <typename T>
double bce_with_logits(const nn::Tensor<T>& logits, int label, nn::Tensor<T>* grad);

// Mean absolute error; `grad` (if non-null) receives the subgradient with
// sign(0) = 0.
template <typename T>
double l1_loss(const nn::Tensor<T>& prediction, const nn::Tensor<T>& target, nn::Tensor<T>* grad);

template <typename T>
struct Pix2PixLoss {
  double d_loss = 0;   // 0.5 * (BCE(real, 1) + BCE(fake, 0))
  double g_adv = 0;    // BCE(fake, 1)
  double g_l1 = 0;     // mean |gen - target|
  double g_loss = 0;   // g_adv + lambda * g_l1
  nn::Tensor<T> grad_d_real;  // d d_loss / d real logits
  nn::Tensor<T> grad_d_fake;  // d d_loss / d fake logits
  nn::Tensor<T> grad_g_fake;  // d g_loss / d fake logits
  nn::Tensor<T> grad_gen;     // d g_loss / d gen_out through the L1 term
};

// Throws Numeric on non-finite inputs and Shape on inconsistent shapes.
template <typename T>
Pix2PixLoss<T> pix2pix_loss(const nn::Tensor<T>& d_real, const nn::Tensor<T>& d_fake,
                            const nn::Tensor<T>& gen_out, const nn::Tensor<T>& target,
                            double lambda_l1, bool gradients = true);

}  // namespace tactile::train
