// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ctft/core/parameter.h"

namespace ctft {

struct AdamConfig {
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-5;
  // false: decay added to the gradient. true: AdamW-style decay on the weights.
  bool decoupled_decay = false;
};

template <typename Real>
struct AdamMoments {
  std::vector<Real> m_re, m_im, v_re, v_im;
};

template <typename Real>
struct AdamState {
  int64_t t = 0;
  std::map<std::string, AdamMoments<Real>> moments;
};

// One Adam update at learning rate lr, real and imaginary parts treated as
// independent coordinates. Parameters absent from `grads` are skipped and
// keep their moments. Throws NumericError naming the parameter before any
// update when a gradient is non-finite.
template <typename Real>
void adam_step(const ParameterList<Real>& params, const GradientMap<Real>& grads, AdamState<Real>& state,
               const AdamConfig& cfg, double lr);

struct SchedulerConfig {
  double base_lr = 1e-4;
  double t0 = 10.0;
  double t_mult = 1.0;
  double eta_min = 0.0;
};

// Cosine annealing with warm restarts, closed form in (fractional) epochs.
double lr_at(const SchedulerConfig& cfg, double epoch);

// Global L2 norm over every real and imaginary gradient entry.
template <typename Real>
double global_norm(const GradientMap<Real>& grads);

// Scales all gradients by max_norm / norm when the norm exceeds max_norm.
// Returns the norm before clipping.
template <typename Real>
double clip_global_norm(GradientMap<Real>& grads, double max_norm = 10.0);

}  // namespace ctft
