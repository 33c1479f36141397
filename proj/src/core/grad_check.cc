// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ctft/core/grad_check.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ctft {

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

namespace {

template <typename F>
std::pair<double, double> ridders_table(F& at, double h) {
  constexpr int kStages = 10;
  constexpr double kShrink = 1.4, kShrink2 = kShrink * kShrink, kSafe = 2.0;
  double table[kStages][kStages];
  double best = 0.0, err = HUGE_VAL;
  table[0][0] = (at(h) - at(-h)) / (2.0 * h);
  best = table[0][0];
  for (int i = 1; i < kStages; ++i) {
    h /= kShrink;
    table[0][i] = (at(h) - at(-h)) / (2.0 * h);
    double fac = kShrink2;
    for (int j = 1; j <= i; ++j) {
      table[j][i] = (table[j - 1][i] * fac - table[j - 1][i - 1]) / (fac - 1.0);
      fac *= kShrink2;
      const double e = std::max(std::abs(table[j][i] - table[j - 1][i]), std::abs(table[j][i] - table[j - 1][i - 1]));
      if (e <= err) {
        err = e;
        best = table[j][i];
      }
    }
    if (std::abs(table[i][i] - table[i - 1][i - 1]) >= kSafe * err) break;
  }
  return {best, err};
}

// Tables whose stencil crosses a kink report a large error bound; of three
// starting steps the one with the smallest bound wins.
template <typename F>
double ridders(F& at, double h) {
  auto best = ridders_table(at, h);
  for (double f : {std::sqrt(10.0), 10.0}) {
    const auto r = ridders_table(at, h / f);
    if (r.second < best.second) best = r;
  }
  return best.first;
}

}  // namespace

template <typename Real>
GradCheckResult grad_check(const std::function<ComplexTensor<Real>()>& loss,
                           const ParameterList<Real>& params,
                           const GradCheckOptions& options) {
  for (const auto& p : params) {
    if (!p.tensor.requires_grad())
      throw Error("grad_check: parameter " + p.name + " does not require grad");
    p.tensor.node().release_grad();
  }
  auto evaluate = [&]() {
    NoGradGuard guard;
    return static_cast<double>(loss().item().real());
  };
  const double base = evaluate();
  const GradientMap<Real> analytic = backward(loss(), params);
  if (evaluate() != base)
    throw DeterminismError("grad_check: loss closure is not deterministic");

  GradCheckResult result;
  Rng rng = Rng::derive(options.seed, 0x67636b);
  for (const auto& p : params) {
    auto tensor = p.tensor;
    const int64_t n = tensor.numel();
    std::vector<int64_t> entries(n);
    std::iota(entries.begin(), entries.end(), 0);
    if (options.max_entries_per_param > 0 && options.max_entries_per_param < n) {
      shuffle(entries.begin(), entries.end(), rng);
      entries.resize(options.max_entries_per_param);
      std::sort(entries.begin(), entries.end());
    }
    const auto it = analytic.grads.find(p.name);
    for (int part = 0; part < 2; ++part) {
      auto values = part == 0 ? tensor.mutable_real() : tensor.mutable_imag();
      for (int64_t k : entries) {
        const Real original = values[k];
        auto at = [&](double offset) {
          values[k] = static_cast<Real>(original + offset);
          return evaluate();
        };
        const double h = options.step;
        double numeric = (at(h) - at(-h)) / (2.0 * h);
        if (options.ridders) numeric = ridders(at, h);
        else if (options.fourth_order) numeric = (4.0 * numeric - (at(2 * h) - at(-2 * h)) / (4.0 * h)) / 3.0;
        values[k] = original;
        double a = 0.0;
        if (it != analytic.grads.end())
          a = part == 0 ? it->second.first[k] : it->second.second[k];
        const double err = relative_error(a, numeric);
        ++result.checked;
        if (err > result.max_rel_error || result.worst_index < 0) {
          result.max_rel_error = err;
          result.worst_param = p.name;
          result.worst_index = k;
          result.worst_is_imag = part == 1;
          result.worst_analytic = a;
          result.worst_numeric = numeric;
        }
      }
    }
  }
  for (const auto& p : params) p.tensor.node().release_grad();
  return result;
}

template GradCheckResult grad_check(const std::function<ComplexTensor<float>()>&,
                                    const ParameterList<float>&, const GradCheckOptions&);
template GradCheckResult grad_check(const std::function<ComplexTensor<double>()>&,
                                    const ParameterList<double>&, const GradCheckOptions&);

}  // namespace ctft
