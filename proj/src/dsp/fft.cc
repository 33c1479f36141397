// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ctft/dsp/fft.h"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

#include "ctft/core/error.h"

namespace ctft {

namespace {

std::mutex g_plan_mutex;

template <typename Real>
struct Fftw;

template <>
struct Fftw<double> {
  using Plan = fftw_plan;
  static Plan forward(int n) {
    std::vector<double> in(n);
    std::vector<fftw_complex> out(n / 2 + 1);
    return fftw_plan_dft_r2c_1d(n, in.data(), out.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  static Plan inverse(int n) {
    std::vector<fftw_complex> in(n / 2 + 1);
    std::vector<double> out(n);
    return fftw_plan_dft_c2r_1d(n, in.data(), out.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  static void r2c(Plan p, double* in, std::complex<double>* out) {
    fftw_execute_dft_r2c(p, in, reinterpret_cast<fftw_complex*>(out));
  }
  static void c2r(Plan p, std::complex<double>* in, double* out) {
    fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(in), out);
  }
};

template <>
struct Fftw<float> {
  using Plan = fftwf_plan;
  static Plan forward(int n) {
    std::vector<float> in(n);
    std::vector<fftwf_complex> out(n / 2 + 1);
    return fftwf_plan_dft_r2c_1d(n, in.data(), out.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  static Plan inverse(int n) {
    std::vector<fftwf_complex> in(n / 2 + 1);
    std::vector<float> out(n);
    return fftwf_plan_dft_c2r_1d(n, in.data(), out.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  static void r2c(Plan p, float* in, std::complex<float>* out) {
    fftwf_execute_dft_r2c(p, in, reinterpret_cast<fftwf_complex*>(out));
  }
  static void c2r(Plan p, std::complex<float>* in, float* out) {
    fftwf_execute_dft_c2r(p, reinterpret_cast<fftwf_complex*>(in), out);
  }
};

template <typename Real>
typename Fftw<Real>::Plan plan(int n, bool inverse) {
  static std::map<std::pair<int, bool>, typename Fftw<Real>::Plan> cache;
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto it = cache.find({n, inverse});
  if (it != cache.end()) return it->second;
  auto p = inverse ? Fftw<Real>::inverse(n) : Fftw<Real>::forward(n);
  if (!p) throw Error("FFTW planning failed for size " + std::to_string(n));
  cache[{n, inverse}] = p;
  return p;
}

}  // namespace

template <typename Real>
void rfft(std::span<const Real> in, std::span<std::complex<Real>> out) {
  const int n = static_cast<int>(in.size());
  if (static_cast<int>(out.size()) != n / 2 + 1) throw DimensionError("rfft: output size");
  // FFTW may not modify r2c input, but its signature is non-const.
  Fftw<Real>::r2c(plan<Real>(n, false), const_cast<Real*>(in.data()), out.data());
}

template <typename Real>
void irfft(std::span<const std::complex<Real>> in, std::span<Real> out) {
  const int n = static_cast<int>(out.size());
  if (static_cast<int>(in.size()) != n / 2 + 1) throw DimensionError("irfft: input size");
  // c2r destroys its input.
  thread_local std::vector<std::complex<Real>> scratch;
  scratch.assign(in.begin(), in.end());
  Fftw<Real>::c2r(plan<Real>(n, true), scratch.data(), out.data());
}

template void rfft(std::span<const float>, std::span<std::complex<float>>);
template void rfft(std::span<const double>, std::span<std::complex<double>>);
template void irfft(std::span<const std::complex<float>>, std::span<float>);
template void irfft(std::span<const std::complex<double>>, std::span<double>);

}  // namespace ctft
