// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ctft/objectives/losses.h"

#include <cmath>
#include <sstream>

#include "ctft/core/ops.h"

namespace ctft {

namespace {

void check_same(const Shape& a, const Shape& b, const char* what) {
  if (a != b)
    throw DimensionError(std::string(what) + ": shape " + to_string(a) + " differs from " +
                         to_string(b));
}

// sqrt(sum |x|^2) over all but the leading axis -> [B]; subgradient 0 at 0.
template <typename Real>
CT<Real> row_norm(const CT<Real>& x) {
  if (x.rank() < 1) throw DimensionError("row_norm needs a leading batch axis");
  const int64_t B = x.shape()[0], n = B ? x.numel() / B : 0;
  CT<Real> out(Shape{B}, true);
  auto norms = std::make_shared<std::vector<double>>(B);
  const Real* xr = x.real().data();
  const Real* xi = x.imag().data();
  for (int64_t b = 0; b < B; ++b) {
    double s = 0;
    for (int64_t k = b * n; k < (b + 1) * n; ++k) s += double(xr[k]) * xr[k] + double(xi[k]) * xi[k];
    (*norms)[b] = std::sqrt(s);
    out.mutable_real()[b] = static_cast<Real>((*norms)[b]);
  }
  if (!detail::needs_grad(x)) return out;
  detail::record(out, [=](detail::TensorNode<Real>& o) {
    Real* gr = detail::grad_re(x);
    Real* gi = detail::grad_im(x);
    for (int64_t b = 0; b < B; ++b) {
      if ((*norms)[b] == 0.0) continue;
      const double g = o.grad_re[b] / (*norms)[b];
      for (int64_t k = b * n; k < (b + 1) * n; ++k) {
        gr[k] += static_cast<Real>(g * xr[k]);
        gi[k] += static_cast<Real>(g * xi[k]);
      }
    }
  });
  return out;
}

// Per-example SI-SDR in dB, clamped; gradient flows to the estimate only.
template <typename Real>
CT<Real> si_sdr_rows(const CT<Real>& target, const CT<Real>& estimate) {
  if (target.requires_grad() && grad_enabled())
    throw Error("si_sdr_loss: gradient with respect to the target is not supported");
  const int64_t B = target.shape()[0], L = target.shape()[1];
  CT<Real> out(Shape{B}, true);
  // d value / d zero-meaned estimate, per sample; empty when clamped.
  auto slope = std::make_shared<std::vector<std::vector<double>>>(B);
  const Real* s = target.real().data();
  const Real* e = estimate.real().data();
  for (int64_t b = 0; b < B; ++b) {
    const Real* sb = s + b * L;
    const Real* eb = e + b * L;
    double ms = 0, me = 0;
    for (int64_t i = 0; i < L; ++i) ms += sb[i], me += eb[i];
    ms /= L;
    me /= L;
    double ss = 0, dot = 0;
    for (int64_t i = 0; i < L; ++i) {
      ss += (sb[i] - ms) * (sb[i] - ms);
      dot += (sb[i] - ms) * (eb[i] - me);
    }
    double raw = 0;
    for (int64_t i = 0; i < L; ++i) raw += double(sb[i]) * sb[i];
    if (!(ss > 1e-24 * raw) || raw == 0.0) throw DomainError("si_sdr: target is identically zero after mean removal");
    const double beta = dot / ss;
    double res = 0;
    for (int64_t i = 0; i < L; ++i) {
      const double r = (eb[i] - me) - beta * (sb[i] - ms);
      res += r * r;
    }
    const double num = beta * beta * ss, den = res + kSiSdrEps;
    double v = num > 0 ? 10.0 * std::log10(num / den) : -kSiSdrCapDb;
    const bool inside = v > -kSiSdrCapDb && v < kSiSdrCapDb;
    v = std::clamp(v, -kSiSdrCapDb, kSiSdrCapDb);
    out.mutable_real()[b] = static_cast<Real>(v);
    if (!inside) continue;
    auto& g = (*slope)[b];
    g.resize(L);
    const double c = 10.0 / std::log(10.0);
    for (int64_t i = 0; i < L; ++i) {
      const double s0 = sb[i] - ms;
      const double r = (eb[i] - me) - beta * s0;
      g[i] = c * (2.0 * s0 / dot - 2.0 * r / den);
    }
  }
  if (!detail::needs_grad(estimate)) return out;
  detail::record(out, [=](detail::TensorNode<Real>& o) {
    Real* ge = detail::grad_re(estimate);
    for (int64_t b = 0; b < B; ++b) {
      const auto& g = (*slope)[b];
      if (g.empty()) continue;
      for (int64_t i = 0; i < L; ++i) ge[b * L + i] += static_cast<Real>(o.grad_re[b] * g[i]);
    }
  });
  return out;
}

template <typename Real>
void check_signals(const CT<Real>& target, const CT<Real>& estimate, const char* what) {
  if (target.rank() != 2) throw DimensionError(std::string(what) + ": signals must be [B, L]");
  check_same(target.shape(), estimate.shape(), what);
}

struct Terms {
  std::vector<double> sc_re, mag_re, sc_im, mag_im;
};

// Spectral loss and, when `terms` is set, its per-resolution parts.
template <typename Real>
CT<Real> multi_resolution(const CT<Real>& target, const CT<Real>& estimate,
                          const ResolutionSet& res, bool with_imag, Terms* terms) {
  check_signals(target, estimate, "mr_stft_loss");
  res.validate();
  CT<Real> total;
  const auto S = static_cast<double>(res.configs.size());
  for (const auto& cfg : res.configs) {
    const CT<Real> X = stft(target, cfg);
    const CT<Real> Xh = stft(estimate, cfg);
    std::vector<std::pair<CT<Real>, CT<Real>>> parts{{real_part(X), real_part(Xh)}};
    if (with_imag) parts.push_back({imag_part(X), imag_part(Xh)});
    for (size_t p = 0; p < parts.size(); ++p) {
      const CT<Real> sc = spectral_convergence(parts[p].first, parts[p].second);
      const CT<Real> mag = log_magnitude(parts[p].first, parts[p].second);
      if (terms) {
        (p == 0 ? terms->sc_re : terms->sc_im).push_back(sc.item().real());
        (p == 0 ? terms->mag_re : terms->mag_im).push_back(mag.item().real());
      }
      const CT<Real> term = add(sc, mag);
      total = total.defined() ? add(total, term) : term;
    }
  }
  return scale(total, std::complex<Real>(static_cast<Real>(1.0 / S), 0));
}

ComplexTensor<double> as_row(const Waveform& w) {
  return ComplexTensor<double>::from_real({1, static_cast<int64_t>(w.size())}, w.samples());
}

void check_waves(const Waveform& a, const Waveform& b) {
  if (a.rate() != b.rate())
    throw DomainError("loss: sample rates " + std::to_string(a.rate()) + " and " +
                      std::to_string(b.rate()) + " differ");
  if (a.size() != b.size())
    throw DimensionError("loss: lengths " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()) + " differ");
}

}  // namespace

ResolutionSet ResolutionSet::standard() {
  return {{{256, 128, 256, WindowKind::kHann, true},
           {512, 256, 512, WindowKind::kHann, true},
           {1024, 512, 1024, WindowKind::kHann, true}}};
}

ResolutionSet ResolutionSet::single(int n_fft, int hop, int win) {
  return {{{n_fft, hop, win, WindowKind::kHann, true}}};
}

void ResolutionSet::validate() const {
  if (configs.empty()) throw ConfigError("resolution set must not be empty");
  for (const auto& c : configs) c.validate();
}

template <typename Real>
CT<Real> spectral_convergence(const CT<Real>& x, const CT<Real>& x_hat) {
  check_same(x.shape(), x_hat.shape(), "spectral_convergence");
  const CT<Real> num = row_norm(sub(x, x_hat));
  const CT<Real> den = add_scalar(row_norm(x), std::complex<Real>(static_cast<Real>(kSpectralEps), 0));
  return mean(div(num, den));
}

template <typename Real>
CT<Real> log_magnitude(const CT<Real>& x, const CT<Real>& x_hat) {
  check_same(x.shape(), x_hat.shape(), "log_magnitude");
  const std::complex<Real> eps(static_cast<Real>(kSpectralEps), 0);
  return mean(abs(sub(log(add_scalar(abs(x), eps)), log(add_scalar(abs(x_hat), eps)))));
}

template <typename Real>
CT<Real> mr_stft_loss_real(const CT<Real>& target, const CT<Real>& estimate,
                           const ResolutionSet& res) {
  return multi_resolution(target, estimate, res, false, nullptr);
}

template <typename Real>
CT<Real> mr_stft_loss_complex(const CT<Real>& target, const CT<Real>& estimate,
                              const ResolutionSet& res) {
  return multi_resolution(target, estimate, res, true, nullptr);
}

template <typename Real>
CT<Real> sr_stft_loss(const CT<Real>& target, const CT<Real>& estimate) {
  return multi_resolution(target, estimate, ResolutionSet::single(320, 80, 320), false, nullptr);
}

template <typename Real>
CT<Real> si_sdr_loss(const CT<Real>& target, const CT<Real>& estimate) {
  check_signals(target, estimate, "si_sdr_loss");
  return neg(mean(si_sdr_rows(target, estimate)));
}

double mr_stft_loss_real(const Waveform& target, const Waveform& estimate,
                         const ResolutionSet& res) {
  check_waves(target, estimate);
  NoGradGuard g;
  return mr_stft_loss_real(as_row(target), as_row(estimate), res).item().real();
}

double mr_stft_loss_complex(const Waveform& target, const Waveform& estimate,
                            const ResolutionSet& res) {
  check_waves(target, estimate);
  NoGradGuard g;
  return mr_stft_loss_complex(as_row(target), as_row(estimate), res).item().real();
}

double sr_stft_loss(const Waveform& target, const Waveform& estimate) {
  check_waves(target, estimate);
  NoGradGuard g;
  return sr_stft_loss(as_row(target), as_row(estimate)).item().real();
}

double si_sdr_loss(const Waveform& target, const Waveform& estimate) {
  check_waves(target, estimate);
  NoGradGuard g;
  return si_sdr_loss(as_row(target), as_row(estimate)).item().real();
}

std::string to_string(SpectralLoss v) {
  switch (v) {
    case SpectralLoss::kMrStftReal: return "mr_stft_real";
    case SpectralLoss::kMrStftComplex: return "mr_stft_complex";
    case SpectralLoss::kSrStft: return "sr_stft";
  }
  return "?";
}

std::string LossReport::to_record() const {
  std::ostringstream os;
  os.precision(17);
  os << "total=" << total;
  for (const auto& [k, v] : components) os << ' ' << k << '=' << v;
  return os.str();
}

template <typename Real>
LossValue<Real> total_loss(const CT<Real>& target, const CT<Real>& estimate,
                           const LossConfig& cfg) {
  const ResolutionSet res =
      cfg.spectral == SpectralLoss::kSrStft ? ResolutionSet::single(320, 80, 320) : cfg.resolutions;
  Terms terms;
  LossValue<Real> out;
  out.total = multi_resolution(target, estimate, res, cfg.spectral == SpectralLoss::kMrStftComplex,
                               &terms);
  auto& c = out.report.components;
  for (size_t s = 0; s < terms.sc_re.size(); ++s) {
    const std::string tag = "/" + std::to_string(s);
    c["sc_re" + tag] = terms.sc_re[s];
    c["mag_re" + tag] = terms.mag_re[s];
    if (!terms.sc_im.empty()) {
      c["sc_im" + tag] = terms.sc_im[s];
      c["mag_im" + tag] = terms.mag_im[s];
    }
  }
  c["spectral"] = out.total.item().real();
  if (cfg.use_si_sdr) {
    const CT<Real> si = si_sdr_loss(target, estimate);
    c["si_sdr"] = si.item().real();
    out.total = add(out.total, scale(si, std::complex<Real>(static_cast<Real>(cfg.si_sdr_weight), 0)));
  }
  out.report.total = out.total.item().real();
  return out;
}

LossReport total_loss(const Waveform& target, const Waveform& estimate, const LossConfig& cfg) {
  check_waves(target, estimate);
  NoGradGuard g;
  return total_loss(as_row(target), as_row(estimate), cfg).report;
}

#define CTFT_INSTANTIATE(R)                                                                     \
  template CT<R> spectral_convergence(const CT<R>&, const CT<R>&);                              \
  template CT<R> log_magnitude(const CT<R>&, const CT<R>&);                                     \
  template CT<R> mr_stft_loss_real(const CT<R>&, const CT<R>&, const ResolutionSet&);           \
  template CT<R> mr_stft_loss_complex(const CT<R>&, const CT<R>&, const ResolutionSet&);        \
  template CT<R> sr_stft_loss(const CT<R>&, const CT<R>&);                                      \
  template CT<R> si_sdr_loss(const CT<R>&, const CT<R>&);                                       \
  template LossValue<R> total_loss(const CT<R>&, const CT<R>&, const LossConfig&);
CTFT_INSTANTIATE(float)
CTFT_INSTANTIATE(double)
#undef CTFT_INSTANTIATE

}  // namespace ctft
