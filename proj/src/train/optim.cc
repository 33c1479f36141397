// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ctft/train/optim.h"

#include <cmath>

namespace ctft {

template <typename Real>
void adam_step(const ParameterList<Real>& params, const GradientMap<Real>& grads, AdamState<Real>& state,
               const AdamConfig& cfg, double lr) {
  for (const auto& p : params) {
    auto it = grads.grads.find(p.name);
    if (it == grads.grads.end()) continue;
    const auto& [gr, gi] = it->second;
    if (gr.size() != static_cast<size_t>(p.tensor.numel()) || gi.size() != gr.size())
      throw DimensionError("gradient for " + p.name + " has the wrong size");
    for (size_t i = 0; i < gr.size(); ++i)
      if (!std::isfinite(gr[i]) || !std::isfinite(gi[i]))
        throw NumericError("non-finite gradient in " + p.name + " at entry " + std::to_string(i));
  }
  ++state.t;
  const double b1 = cfg.beta1, b2 = cfg.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  for (const auto& p : params) {
    auto it = grads.grads.find(p.name);
    if (it == grads.grads.end()) continue;
    const auto& [gr, gi] = it->second;
    const size_t n = gr.size();
    auto& mo = state.moments[p.name];
    if (mo.m_re.size() != n) mo = {std::vector<Real>(n), std::vector<Real>(n), std::vector<Real>(n), std::vector<Real>(n)};
    ComplexTensor<Real> t = p.tensor;
    auto update = [&](std::span<Real> w, const std::vector<Real>& g, std::vector<Real>& m, std::vector<Real>& v) {
      for (size_t i = 0; i < n; ++i) {
        double gv = g[i];
        if (!cfg.decoupled_decay) gv += cfg.weight_decay * w[i];
        m[i] = static_cast<Real>(b1 * m[i] + (1 - b1) * gv);
        v[i] = static_cast<Real>(b2 * v[i] + (1 - b2) * gv * gv);
        const double mh = m[i] / c1, vh = v[i] / c2;
        double step = lr * mh / (std::sqrt(vh) + cfg.eps);
        if (cfg.decoupled_decay) step += lr * cfg.weight_decay * w[i];
        w[i] = static_cast<Real>(w[i] - step);
      }
    };
    update(t.mutable_real(), gr, mo.m_re, mo.v_re);
    if (!t.is_real()) update(t.mutable_imag(), gi, mo.m_im, mo.v_im);
  }
}

double lr_at(const SchedulerConfig& cfg, double epoch) {
  if (epoch < 0) throw DomainError("lr_at: negative epoch");
  double t_cur = epoch, t_i = cfg.t0;
  if (cfg.t_mult == 1.0) {
    t_cur = std::fmod(epoch, cfg.t0);
  } else {
    const double n = std::floor(std::log(epoch / cfg.t0 * (cfg.t_mult - 1) + 1) / std::log(cfg.t_mult));
    t_cur = epoch - cfg.t0 * (std::pow(cfg.t_mult, n) - 1) / (cfg.t_mult - 1);
    t_i = cfg.t0 * std::pow(cfg.t_mult, n);
  }
  return cfg.eta_min + (cfg.base_lr - cfg.eta_min) * (1 + std::cos(M_PI * t_cur / t_i)) / 2;
}

template <typename Real>
double global_norm(const GradientMap<Real>& grads) {
  double s = 0;
  for (const auto& [_, g] : grads.grads) {
    for (Real v : g.first) s += double(v) * v;
    for (Real v : g.second) s += double(v) * v;
  }
  return std::sqrt(s);
}

template <typename Real>
double clip_global_norm(GradientMap<Real>& grads, double max_norm) {
  const double norm = global_norm(grads);
  if (norm > max_norm) {
    const double k = max_norm / norm;
    for (auto& [_, g] : grads.grads) {
      for (Real& v : g.first) v = static_cast<Real>(v * k);
      for (Real& v : g.second) v = static_cast<Real>(v * k);
    }
  }
  return norm;
}

#define CTFT_OPTIM(R)                                                                                 \
  template void adam_step(const ParameterList<R>&, const GradientMap<R>&, AdamState<R>&, const AdamConfig&, \
                          double);                                                                    \
  template double global_norm(const GradientMap<R>&);                                                 \
  template double clip_global_norm(GradientMap<R>&, double);
CTFT_OPTIM(float)
CTFT_OPTIM(double)

}  // namespace ctft
