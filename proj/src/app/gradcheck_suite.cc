// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ctft/app/gradcheck_suite.h"

#include <cstdio>
#include <functional>

#include "ctft/core/grad_check.h"
#include "ctft/core/linalg.h"
#include "ctft/core/ops.h"
#include "ctft/dsp/stft.h"
#include "ctft/nn/attention.h"
#include "ctft/nn/layers.h"
#include "ctft/objectives/losses.h"

namespace ctft {

namespace {

using T = ComplexTensor<double>;

constexpr double kLinear = 1e-6;
constexpr double kNonlinear = 1e-5;

T leaf(const Shape& shape, Rng& rng) {
  T t = T::uniform(shape, rng, -1.0, 1.0);
  t.set_requires_grad(true);
  return t;
}

void jitter(const ParameterList<double>& ps, Rng& rng, double amp) {
  NoGradGuard g;
  for (auto p : ps) {
    for (auto& v : p.tensor.mutable_real()) v += rng.uniform(-amp, amp);
    if (!p.tensor.is_real())
      for (auto& v : p.tensor.mutable_imag()) v += rng.uniform(-amp, amp);
  }
}

ParameterList<double> with(ParameterList<double> ps, std::initializer_list<std::pair<const char*, T>> extra) {
  for (const auto& [n, t] : extra) ps.push_back({n, t});
  return ps;
}

class Suite {
 public:
  explicit Suite(uint64_t seed) : rng_(seed) {}

  // Projects a tensor-valued f onto a fixed random direction.
  void projected(const std::string& name, double threshold, const std::function<T()>& f,
                 const ParameterList<double>& ps, double step = 1e-6, int64_t entries = 24,
                 bool fourth = false) {
    Shape shape;
    {
      NoGradGuard g;
      shape = f().shape();
    }
    const T r = T::uniform(shape, rng_);
    scalar(name, threshold, [&] { return sum(real_part(mul(f(), conj(r)))); }, ps, step, entries, fourth);
  }

  void scalar(const std::string& name, double threshold, const std::function<T()>& f,
              const ParameterList<double>& ps, double step = 1e-6, int64_t entries = 24,
              bool fourth = false) {
    GradCheckOptions o{step, entries, rng_.next_u64(), fourth};
    if (threshold > kLinear) {
      o.step = 1e-5;
      o.ridders = true;
    }
    const auto r = grad_check<double>(f, ps, o);
    BlockCheck b{name, r.max_rel_error, threshold, {}};
    if (!r.worst_param.empty())
      b.worst = r.worst_param + "[" + std::to_string(r.worst_index) + (r.worst_is_imag ? "i" : "") + "]";
    report_.blocks.push_back(b);
  }

  void add(BlockCheck b) { report_.blocks.push_back(std::move(b)); }
  Rng& rng() { return rng_; }
  GradcheckReport take() { return std::move(report_); }

 private:
  Rng rng_;
  GradcheckReport report_;
};

}  // namespace

bool GradcheckReport::all_passed() const {
  for (const auto& b : blocks)
    if (!b.passed()) return false;
  return !blocks.empty();
}

void GradcheckReport::print(std::ostream& os) const {
  char line[256];
  int failed = 0;
  for (const auto& b : blocks) {
    std::snprintf(line, sizeof line, "%-24s %.3e  < %.0e  %s  %s\n", b.block.c_str(), b.max_rel_error,
                  b.threshold, b.passed() ? "ok  " : "FAIL", b.worst.c_str());
    os << line;
    failed += !b.passed();
  }
  os << (failed ? std::to_string(failed) + " of " + std::to_string(blocks.size()) + " checks failed\n"
                : "all " + std::to_string(blocks.size()) + " checks passed\n");
}

GradcheckReport run_gradcheck_suite(const RunConfig& cfg) {
  const ModelConfig& m = cfg.model;
  const bool strict = m.flipped_sign;
  const BatchNormKind bn = m.bn;
  Suite s(m.seed ^ 0x67726164636b);
  Rng& rng = s.rng();
  const Context train{Mode::kTrain};
  const Context eval{Mode::kEval};

  {
    // The product z * conj(z) is real; its imaginary part is the error.
    const std::complex<double> z(0.6, -1.3);
    Conv2dSpec spec;
    spec.flipped_sign = strict;
    NoGradGuard g;
    const auto p = conv2d(T::full({1, 1, 1, 1}, z), T::full({1, 1, 1, 1}, std::conj(z)), T(), spec).item();
    const double err = std::abs(p - std::norm(z)) / std::norm(z);
    s.add({"conj_product", err, 1e-12, strict ? "sign flipped" : ""});
  }
  {
    auto x = leaf({2, 2, 5, 4}, rng), w = leaf({3, 2, 3, 3}, rng), b = leaf({3}, rng);
    Conv2dSpec spec{{2, 1}, {1, 1}};
    spec.flipped_sign = strict;
    s.projected("conv2d", kLinear, [&] { return conv2d(x, w, b, spec); },
                {{"x", x}, {"w", w}, {"b", b}}, 1e-3, 0);
    auto wt = leaf({2, 3, 3, 3}, rng);
    spec.output_padding = {1, 0};
    s.projected("conv_transpose2d", kLinear, [&] { return conv_transpose2d(x, wt, b, spec); },
                {{"x", x}, {"w", wt}, {"b", b}}, 1e-3, 0);
  }
  {
    auto x = leaf({3, 4, 5}, rng);
    s.projected("crelu", kNonlinear, [&] { return crelu(x); }, {{"x", x}}, 1e-6, 0);
  }
  {
    ComplexBatchNorm<double> n(2, bn);
    jitter(n.parameters(), rng, 0.3);
    auto x = leaf({3, 2, 2, 3}, rng);
    s.projected("batch_norm_train", kNonlinear, [&] { return n.forward(x, train); },
                with(n.parameters(), {{"x", x}}), 1e-6, 0);
    s.projected("batch_norm_eval", kLinear, [&] { return n.forward(x, eval); },
                with(n.parameters(), {{"x", x}}), 1e-3, 0);
  }
  {
    EncoderBlock<double> e(2, 3, m.kernel, {2, 2}, m.padding, bn, rng, strict);
    auto x = leaf({2, 2, 4, 4}, rng);
    s.projected("encoder", kNonlinear, [&] { return e.forward(x, train); }, with(e.parameters(), {{"x", x}}));
  }
  {
    auto x = leaf({2, 3, 3, 4}, rng), k = leaf({2, 2, 3, 4}, rng);
    DecoderBlock<double> hid(3, 2, 2, m.kernel, {2, 2}, m.padding, false, bn, rng, strict);
    s.projected("decoder", kNonlinear, [&] { return hid.forward(x, k, train); },
                with(hid.parameters(), {{"x", x}, {"s", k}}));
    DecoderBlock<double> out(3, 2, 1, m.kernel, {2, 1}, m.padding, true, bn, rng, strict);
    s.projected("decoder_output", kLinear, [&] { return out.forward(x, k, train); },
                with(out.parameters(), {{"x", x}, {"s", k}}), 1e-3);
  }
  {
    SkipBlock<double> k(2, bn, rng, strict);
    auto x = leaf({2, 2, 3, 3}, rng);
    s.projected("skip", kNonlinear, [&] { return k.forward(x, train); }, with(k.parameters(), {{"x", x}}));
  }
  {
    ComplexLinear<double> l(5, 3, rng);
    jitter(l.parameters(), rng, 0.3);
    auto x = leaf({2, 5}, rng);
    s.projected("linear", kLinear, [&] { return l.forward(x); }, with(l.parameters(), {{"x", x}}), 1e-3, 0);
  }
  {
    ComplexLayerNorm<double> ln(6);
    jitter(ln.parameters(), rng, 0.3);
    auto x = leaf({2, 6}, rng);
    s.projected("layer_norm", kNonlinear, [&] { return ln.forward(x); }, with(ln.parameters(), {{"x", x}}), 1e-6, 0);
  }
  {
    ComplexMhsa<double> a(8, 2, rng, m.conformer.score);
    jitter(a.parameters(), rng, 0.3);
    auto x = leaf({1, 4, 8}, rng);
    s.projected("mhsa", kNonlinear, [&] { return a.forward(x); }, with(a.parameters(), {{"x", x}}), 1e-3, 0, true);
  }
  {
    ComplexFeedForward<double> f(4, m.conformer.ff_expansion, m.conformer.dropout, rng);
    jitter(f.parameters(), rng, 0.2);
    auto x = leaf({1, 3, 4}, rng);
    s.projected("feed_forward", kNonlinear, [&] { return f.forward(x, eval); }, with(f.parameters(), {{"x", x}}));
  }
  {
    ComplexConvModule<double> c(4, 3, m.conformer.dropout, rng);
    jitter(c.parameters(), rng, 0.2);
    auto x = leaf({1, 5, 4}, rng);
    s.projected("conv_module", kNonlinear, [&] { return c.forward(x, eval); }, with(c.parameters(), {{"x", x}}));
  }
  {
    ConformerConfig cc = m.conformer;
    cc.layers = 1;
    cc.heads = 2;
    cc.kernel = 3;
    const bool with_conv = m.bottleneck != BottleneckKind::kTransformer;
    Conformer<double> c(4, 4, cc, with_conv, rng);
    jitter(c.parameters(), rng, 0.1);
    auto x = leaf({1, 4, 4, 6}, rng);
    s.projected("conformer", kNonlinear, [&] { return c.forward(x, eval); }, with(c.parameters(), {{"x", x}}));
  }
  {
    const auto arr = m.attention == AttentionVariant::kCgabSeries ? CgabArrangement::kSeries : CgabArrangement::kParallel;
    Cgab<double> g(2, 4, 6, arr, 3, bn, rng);
    jitter(g.parameters(), rng, 0.2);
    auto x = leaf({2, 2, 4, 6}, rng);
    s.projected("cgab", kNonlinear, [&] { return g.forward(x, train); }, with(g.parameters(), {{"x", x}}));
    Ftb<double> f(3, 4, 5, 3, bn, rng);
    jitter(f.parameters(), rng, 0.2);
    auto y = leaf({2, 3, 4, 5}, rng);
    s.projected("ftb", kNonlinear, [&] { return f.forward(y, train); }, with(f.parameters(), {{"x", y}}));
  }
  {
    const StftConfig st{16, 4, 12, m.stft.window, true};
    auto x = leaf({2, 40}, rng);
    s.projected("stft", kLinear, [&] { return stft(x, st); }, {{"x", x}}, 1e-3, 0);
    auto spec = leaf({2, 9, 11}, rng);
    s.projected("istft", kLinear, [&] { return istft(spec, st, 41); }, {{"spec", spec}}, 1e-3, 0);
  }
  {
    // Each loss through a learnable per-bin spectral gain.
    const StftConfig st{64, 16, 64, WindowKind::kHann, true};
    const int64_t L = 1200;
    const T x = T::uniform_real({2, L}, rng, -0.5, 0.5);
    const T target = T::uniform_real({2, L}, rng, -0.5, 0.5);
    T gain = T::uniform({1, 33, 1}, rng, 0.5, 1.5);
    gain.set_requires_grad(true);
    auto est = [&] { return real_part(istft(mul(stft(x, st), gain), st, L)); };
    ResolutionSet uncentred = ResolutionSet::standard();
    for (auto& c : uncentred.configs) c.center = false;
    LossConfig lc = cfg.train.loss;
    if (lc.spectral == SpectralLoss::kMrStftComplex)
      for (auto& c : lc.resolutions.configs) c.center = false;
    const ParameterList<double> ps{{"gain", gain}};
    s.scalar("spectral_convergence", kNonlinear, [&] { return spectral_convergence(stft(target, st), stft(est(), st)); }, ps, 1e-6, 0);
    s.scalar("log_magnitude", kNonlinear,
             [&] { return log_magnitude(real_part(stft(target, st)), real_part(stft(est(), st))); }, ps, 1e-7, 0);
    s.scalar("mr_stft_real", kNonlinear, [&] { return mr_stft_loss_real(target, est(), ResolutionSet::standard()); }, ps, 1e-7, 0);
    s.scalar("mr_stft_complex", kNonlinear, [&] { return mr_stft_loss_complex(target, est(), uncentred); }, ps, 1e-7, 0);
    s.scalar("sr_stft", kNonlinear, [&] { return sr_stft_loss(target, est()); }, ps, 1e-6, 0);
    s.scalar("si_sdr", kNonlinear, [&] { return si_sdr_loss(target, est()); }, ps, 1e-6, 0);
    s.scalar("total_loss", kNonlinear, [&] { return total_loss(target, est(), lc).total; }, ps, 1e-7, 0);
  }
  return s.take();
}

}  // namespace ctft
