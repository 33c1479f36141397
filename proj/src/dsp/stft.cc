// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ctft/dsp/stft.h"

#include <cmath>
#include <complex>
#include <memory>

#include "ctft/core/ops.h"
#include "ctft/dsp/fft.h"

namespace ctft {

namespace {

using detail::grad_im;
using detail::grad_re;
using detail::needs_grad;
using detail::record;

template <typename Real>
std::vector<Real> window_as(const StftConfig& cfg) {
  const auto w = padded_window(cfg);
  return std::vector<Real>(w.begin(), w.end());
}

// Frames + window + rfft over an already padded signal [B, Lp].
template <typename Real>
ComplexTensor<Real> framed_rfft(const ComplexTensor<Real>& padded, const StftConfig& cfg) {
  const int64_t B = padded.shape()[0], Lp = padded.shape()[1];
  const int N = cfg.n_fft, F = cfg.bins();
  if (Lp < N)
    throw DimensionError("stft: signal of " + std::to_string(Lp) +
                         " samples is shorter than n_fft " + std::to_string(N));
  const int64_t T = 1 + (Lp - N) / cfg.hop;
  auto win = std::make_shared<std::vector<Real>>(window_as<Real>(cfg));
  ComplexTensor<Real> out(Shape{B, F, T});
  std::vector<Real> frame(N);
  std::vector<std::complex<Real>> spec(F);
  for (int64_t b = 0; b < B; ++b) {
    const Real* x = padded.real().data() + b * Lp;
    Real* orr = out.mutable_real().data() + b * F * T;
    Real* oi = out.mutable_imag().data() + b * F * T;
    for (int64_t t = 0; t < T; ++t) {
      for (int n = 0; n < N; ++n) frame[n] = x[t * cfg.hop + n] * (*win)[n];
      rfft<Real>(frame, spec);
      for (int k = 0; k < F; ++k) {
        orr[k * T + t] = spec[k].real();
        oi[k * T + t] = spec[k].imag();
      }
    }
  }
  if (needs_grad(padded)) {
    record(out, [padded, win, B, Lp, N, F, T, hop = cfg.hop](detail::TensorNode<Real>& o) {
      Real* gx = grad_re(padded);
      std::vector<std::complex<Real>> g(F);
      std::vector<Real> frame(N);
      for (int64_t b = 0; b < B; ++b) {
        const Real* gr = o.grad_re.data() + b * F * T;
        const Real* gi = o.grad_im.data() + b * F * T;
        for (int64_t t = 0; t < T; ++t) {
          // dL/dx_n = w_n Re(sum_k G_k e^{+j2pi kn/N}); c2r counts the
          // interior bins twice.
          for (int k = 0; k < F; ++k) {
            const Real s = (k == 0 || 2 * k == N) ? Real(1) : Real(0.5);
            g[k] = {s * gr[k * T + t], s * gi[k * T + t]};
          }
          irfft<Real>(g, frame);
          Real* dst = gx + b * Lp + t * hop;
          for (int n = 0; n < N; ++n) dst[n] += frame[n] * (*win)[n];
        }
      }
    });
  }
  return out;
}

}  // namespace

void StftConfig::validate() const {
  if (n_fft < 2 || hop < 1 || win_length < 1)
    throw ConfigError("stft config: n_fft, hop and win_length must be positive");
  if (hop > win_length || win_length > n_fft)
    throw ConfigError("stft config requires hop <= win_length <= n_fft, got hop " +
                      std::to_string(hop) + ", win " + std::to_string(win_length) +
                      ", n_fft " + std::to_string(n_fft));
}

int64_t StftConfig::frames(int64_t length) const {
  if (center) return 1 + length / hop;
  if (length < n_fft) return 0;
  return 1 + (length - n_fft) / hop;
}

std::vector<double> make_window(WindowKind kind, int length) {
  std::vector<double> w(length);
  for (int n = 0; n < length; ++n) {
    const double h = 0.5 - 0.5 * std::cos(2.0 * M_PI * n / length);
    w[n] = kind == WindowKind::kHann ? h : std::sqrt(h);
  }
  return w;
}

std::vector<double> padded_window(const StftConfig& cfg) {
  std::vector<double> w(cfg.n_fft, 0.0);
  const auto core = make_window(cfg.window, cfg.win_length);
  const int offset = (cfg.n_fft - cfg.win_length) / 2;
  std::copy(core.begin(), core.end(), w.begin() + offset);
  return w;
}

bool satisfies_cola(const StftConfig& cfg) {
  cfg.validate();
  const auto w = padded_window(cfg);
  std::vector<double> env(cfg.hop, 0.0);
  for (int n = 0; n < cfg.n_fft; ++n) env[n % cfg.hop] += w[n] * w[n];
  const auto [lo, hi] = std::minmax_element(env.begin(), env.end());
  return *lo > 0.0 && (*hi - *lo) <= 1e-10 * *hi;
}

template <typename Real>
ComplexTensor<Real> stft(const ComplexTensor<Real>& signal, const StftConfig& cfg) {
  cfg.validate();
  if (signal.rank() != 2) throw DimensionError("stft expects a [B, L] signal");
  const int64_t L = signal.shape()[1];
  if (!cfg.center) {
    if (L < cfg.win_length) throw DimensionError("stft: signal shorter than window");
    return framed_rfft(signal, cfg);
  }
  const int64_t pad = cfg.n_fft / 2;
  return framed_rfft(pad_reflect(real_part(signal), 1, pad, pad), cfg);
}

template <typename Real>
ComplexTensor<Real> istft(const ComplexTensor<Real>& spec, const StftConfig& cfg,
                          int64_t out_length) {
  cfg.validate();
  if (!satisfies_cola(cfg))
    throw DspError("istft: window/hop pair (" + std::to_string(cfg.win_length) + ", " +
                   std::to_string(cfg.hop) + ") violates the COLA condition");
  if (spec.rank() != 3 || spec.shape()[1] != cfg.bins())
    throw DimensionError("istft expects [B, " + std::to_string(cfg.bins()) + ", T], got " +
                         to_string(spec.shape()));
  const int64_t B = spec.shape()[0], T = spec.shape()[2];
  const int N = cfg.n_fft, F = cfg.bins(), hop = cfg.hop;
  const int64_t full = N + hop * (T - 1);
  const int64_t offset = cfg.center ? N / 2 : 0;
  auto win = std::make_shared<std::vector<Real>>(window_as<Real>(cfg));
  auto env = std::make_shared<std::vector<Real>>(full, Real(0));
  for (int64_t t = 0; t < T; ++t)
    for (int n = 0; n < N; ++n) (*env)[t * hop + n] += (*win)[n] * (*win)[n];
  for (int64_t i = 0; i < out_length; ++i) {
    const int64_t j = i + offset;
    if (j < full && (*env)[j] < Real(1e-11))
      throw DspError("istft: window envelope vanishes inside the output range");
  }
  ComplexTensor<Real> out(Shape{B, out_length}, true);
  std::vector<std::complex<Real>> col(F);
  std::vector<Real> frame(N), ola(full);
  const Real inv_n = Real(1) / N;
  for (int64_t b = 0; b < B; ++b) {
    std::fill(ola.begin(), ola.end(), Real(0));
    const Real* xr = spec.real().data() + b * F * T;
    const Real* xi = spec.imag().data() + b * F * T;
    for (int64_t t = 0; t < T; ++t) {
      for (int k = 0; k < F; ++k) col[k] = {xr[k * T + t], xi[k * T + t]};
      irfft<Real>(col, frame);
      for (int n = 0; n < N; ++n) ola[t * hop + n] += frame[n] * inv_n * (*win)[n];
    }
    Real* y = out.mutable_real().data() + b * out_length;
    for (int64_t i = 0; i < out_length; ++i) {
      const int64_t j = i + offset;
      y[i] = j < full ? ola[j] / (*env)[j] : Real(0);
    }
  }
  if (needs_grad(spec)) {
    record(out, [spec, win, env, B, T, N, F, hop, full, offset,
                 out_length](detail::TensorNode<Real>& o) {
      Real* gr = grad_re(spec);
      Real* gi = grad_im(spec);
      std::vector<Real> gola(full), frame(N);
      std::vector<std::complex<Real>> g(F);
      const Real inv_n = Real(1) / N;
      for (int64_t b = 0; b < B; ++b) {
        std::fill(gola.begin(), gola.end(), Real(0));
        const Real* gy = o.grad_re.data() + b * out_length;
        for (int64_t i = 0; i < out_length; ++i) {
          const int64_t j = i + offset;
          if (j < full) gola[j] += gy[i] / (*env)[j];
        }
        for (int64_t t = 0; t < T; ++t) {
          for (int n = 0; n < N; ++n) frame[n] = gola[t * hop + n] * (*win)[n];
          rfft<Real>(frame, g);
          for (int k = 0; k < F; ++k) {
            const bool edge = k == 0 || 2 * k == N;
            const Real s = (edge ? Real(1) : Real(2)) * inv_n;
            gr[b * F * T + k * T + t] += s * g[k].real();
            if (!edge) gi[b * F * T + k * T + t] += s * g[k].imag();
          }
        }
      }
    });
  }
  return out;
}

Spectrogram stft(const Waveform& wave, const StftConfig& cfg) {
  auto x = ComplexTensor<double>::from_real(
      {1, static_cast<int64_t>(wave.size())}, wave.samples());
  NoGradGuard guard;
  auto s = stft(x, cfg);
  return {reshape(s, {s.shape()[1], s.shape()[2]}), cfg, wave.rate()};
}

Waveform istft(const Spectrogram& spec, const StftConfig& cfg, int64_t out_length) {
  if (!(spec.config == cfg)) throw ConfigError("istft: config does not match the spectrogram");
  NoGradGuard guard;
  auto x = reshape(spec.data, {1, spec.data.shape()[0], spec.data.shape()[1]});
  auto y = istft(x, cfg, out_length);
  return Waveform(std::vector<double>(y.real().begin(), y.real().end()), spec.origin_rate);
}

template ComplexTensor<float> stft(const ComplexTensor<float>&, const StftConfig&);
template ComplexTensor<double> stft(const ComplexTensor<double>&, const StftConfig&);
template ComplexTensor<float> istft(const ComplexTensor<float>&, const StftConfig&, int64_t);
template ComplexTensor<double> istft(const ComplexTensor<double>&, const StftConfig&, int64_t);

}  // namespace ctft
