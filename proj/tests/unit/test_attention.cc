// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>

#include "ctft/nn/attention.h"
#include "oracles.h"
#include "test_util.h"

namespace ctft {
namespace {

using testing::check_gradients;
using testing::leaf;
using testing::max_abs_diff;
using testing::T64;
using C64 = std::complex<double>;

const Context kTrain{Mode::kTrain};
const Context kEval{Mode::kEval};

void randomize(const ParameterList<double>& ps, Rng& rng, double amp = 0.3) {
  NoGradGuard g;
  for (auto p : ps) {
    for (auto& v : p.tensor.mutable_real()) v += rng.uniform(-amp, amp);
    if (!p.tensor.is_real())
      for (auto& v : p.tensor.mutable_imag()) v += rng.uniform(-amp, amp);
  }
}

void zero(T64 t) {
  NoGradGuard g;
  std::fill(t.mutable_real().begin(), t.mutable_real().end(), 0.0);
  std::fill(t.mutable_imag().begin(), t.mutable_imag().end(), 0.0);
}

template <typename M>
void copy_parameters(const M& from, M& to) {
  auto a = from.parameters();
  auto b = to.parameters();
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].name, b[i].name);
    std::copy(a[i].tensor.real().begin(), a[i].tensor.real().end(),
              b[i].tensor.mutable_real().begin());
    std::copy(a[i].tensor.imag().begin(), a[i].tensor.imag().end(),
              b[i].tensor.mutable_imag().begin());
  }
}

std::vector<C64> apply_linear(const ComplexLinear<double>& l, const std::vector<C64>& x) {
  const int64_t out = l.weight.shape()[0], in = l.weight.shape()[1];
  std::vector<C64> y(out);
  for (int64_t o = 0; o < out; ++o) {
    C64 acc = l.bias.defined() ? l.bias.flat(o) : C64(0);
    for (int64_t i = 0; i < in; ++i) acc += l.weight.flat(o * in + i) * x[i];
    y[o] = acc;
  }
  return y;
}

// Scalar-loop multi-head attention for one batch item.
std::vector<std::vector<C64>> mhsa_reference(const ComplexMhsa<double>& m,
                                             const std::vector<std::vector<C64>>& x) {
  const size_t S = x.size(), d = x[0].size(), h = m.heads(), dh = d / h;
  std::vector<std::vector<C64>> q, k, v, merged(S, std::vector<C64>(d));
  for (const auto& row : x) {
    q.push_back(apply_linear(*m.q, row));
    k.push_back(apply_linear(*m.k, row));
    v.push_back(apply_linear(*m.v, row));
  }
  for (size_t head = 0; head < h; ++head) {
    for (size_t i = 0; i < S; ++i) {
      std::vector<double> s(S);
      double mx = -1e300;
      for (size_t j = 0; j < S; ++j) {
        C64 dot = 0;
        for (size_t c = head * dh; c < (head + 1) * dh; ++c) dot += q[i][c] * std::conj(k[j][c]);
        s[j] = dot.real() / std::sqrt(double(dh));
        mx = std::max(mx, s[j]);
      }
      double z = 0;
      for (auto& e : s) z += (e = std::exp(e - mx));
      for (size_t c = head * dh; c < (head + 1) * dh; ++c) {
        C64 acc = 0;
        for (size_t j = 0; j < S; ++j) acc += s[j] / z * v[j][c];
        merged[i][c] = acc;
      }
    }
  }
  std::vector<std::vector<C64>> out;
  for (const auto& row : merged) out.push_back(apply_linear(*m.o, row));
  return out;
}

TEST(ComplexLayerNorm, NormalisesEachToken) {
  Rng rng(1);
  ComplexLayerNorm<double> ln(6);
  auto x = T64::uniform({2, 3, 6}, rng, -4, 5);
  auto y = ln.forward(x);
  for (int t = 0; t < 6; ++t) {
    C64 m = 0;
    double p = 0;
    for (int c = 0; c < 6; ++c) m += y.flat(t * 6 + c), p += std::norm(y.flat(t * 6 + c));
    EXPECT_LT(std::abs(m), 1e-12);
    EXPECT_NEAR(p / 6, 1.0, 1e-5);
  }
  randomize(ln.parameters(), rng);
  auto xl = leaf({2, 6}, rng);
  auto ps = ln.parameters();
  ps.push_back({"x", xl});
  auto res = check_gradients([&] { return ln.forward(xl); }, ps, rng);
  EXPECT_LT(res.max_rel_error, 1e-6) << res.worst_param;
}

TEST(ComplexMhsa, SingleTokenIsValueProjection) {
  Rng rng(2);
  ComplexMhsa<double> m(8, 2, rng);
  randomize(m.parameters(), rng);
  auto x = T64::uniform({3, 1, 8}, rng);
  auto y = m.forward(x);
  auto ref = m.o->forward(m.v->forward(x));
  EXPECT_LT(max_abs_diff(y, ref), 1e-14);
}

TEST(ComplexMhsa, MatchesScalarReference) {
  Rng rng(3);
  for (int heads : {1, 2, 4}) {
    ComplexMhsa<double> m(8, heads, rng);
    randomize(m.parameters(), rng);
    auto x = T64::uniform({1, 4, 8}, rng);
    std::vector<std::vector<C64>> rows(4, std::vector<C64>(8));
    for (int s = 0; s < 4; ++s)
      for (int c = 0; c < 8; ++c) rows[s][c] = x.flat(s * 8 + c);
    auto ref = mhsa_reference(m, rows);
    auto y = m.forward(x);
    double err = 0;
    for (int s = 0; s < 4; ++s)
      for (int c = 0; c < 8; ++c) err = std::max(err, std::abs(y.flat(s * 8 + c) - ref[s][c]));
    EXPECT_LT(err, 1e-12) << heads;
  }
  EXPECT_THROW(ComplexMhsa<double>(6, 4, rng), ConfigError);
}

TEST(ComplexMhsa, SoftmaxRowsAndSymmetries) {
  Rng rng(4);
  ComplexMhsa<double> m(8, 2, rng);
  randomize(m.parameters(), rng);
  auto x = T64::uniform({2, 5, 8}, rng, -2, 2);
  auto p = m.weights(x);
  ASSERT_EQ(p.shape(), (Shape{2, 2, 5, 5}));
  EXPECT_TRUE(p.is_real());
  for (int r = 0; r < 20; ++r) {
    double s = 0;
    for (int j = 0; j < 5; ++j) {
      EXPECT_GE(p.real()[r * 5 + j], 0.0);
      s += p.real()[r * 5 + j];
    }
    EXPECT_NEAR(s, 1.0, 1e-7);
  }

  // Equal tokens give equal rows.
  auto dup = x.clone();
  for (int c = 0; c < 8; ++c) {
    dup.mutable_real()[8 + c] = dup.real()[c];
    dup.mutable_imag()[8 + c] = dup.imag()[c];
  }
  auto yd = m.forward(dup);
  for (int c = 0; c < 8; ++c) EXPECT_LT(std::abs(yd.flat(c) - yd.flat(8 + c)), 1e-14);

  // Permutation equivariance.
  const std::vector<int> perm{3, 0, 4, 1, 2};
  T64 xp({2, 5, 8});
  for (int b = 0; b < 2; ++b)
    for (int s = 0; s < 5; ++s)
      for (int c = 0; c < 8; ++c) {
        xp.mutable_real()[(b * 5 + s) * 8 + c] = x.real()[(b * 5 + perm[s]) * 8 + c];
        xp.mutable_imag()[(b * 5 + s) * 8 + c] = x.imag()[(b * 5 + perm[s]) * 8 + c];
      }
  auto y = m.forward(x), yp = m.forward(xp);
  for (int b = 0; b < 2; ++b)
    for (int s = 0; s < 5; ++s)
      for (int c = 0; c < 8; ++c)
        EXPECT_LT(std::abs(yp.flat((b * 5 + s) * 8 + c) - y.flat((b * 5 + perm[s]) * 8 + c)),
                  1e-13);

  // Complex-linear in V.
  const C64 alpha(0.7, -1.3);
  zero(m.o->bias);
  auto base = m.forward(x);
  for (T64 t : {m.v->weight, m.v->bias}) {
    for (int64_t k = 0; k < t.numel(); ++k) {
      const C64 z = t.flat(k) * alpha;
      t.mutable_real()[k] = z.real();
      t.mutable_imag()[k] = z.imag();
    }
  }
  auto scaled = m.forward(x);
  for (int64_t k = 0; k < base.numel(); ++k)
    EXPECT_LT(std::abs(scaled.flat(k) - alpha * base.flat(k)), 1e-10);
}

TEST(ComplexMhsa, Gradients) {
  Rng rng(5);
  for (auto kind : {ScoreKind::kReal, ScoreKind::kMagnitude}) {
    ComplexMhsa<double> m(8, 2, rng, kind);
    randomize(m.parameters(), rng);
    auto x = leaf({1, 4, 8}, rng);
    auto ps = m.parameters();
    ps.push_back({"x", x});
    auto res = check_gradients([&] { return m.forward(x); }, ps, rng, 1e-3, 0, true);
    EXPECT_LT(res.max_rel_error, 1e-6) << res.worst_param << " " << res.worst_index << " " << res.worst_analytic << " vs " << res.worst_numeric;
  }
}

TEST(Conformer, ShapeAndResidualIdentity) {
  Rng rng(6);
  Conformer<double> big(256, 2, {}, true, rng);
  auto xb = T64::uniform({1, 256, 2, 12}, rng);
  EXPECT_EQ(big.forward(xb, kEval).shape(), (Shape{1, 256, 2, 12}));
  EXPECT_THROW(big.forward(T64::zeros({1, 128, 2, 12}), kEval), DimensionError);

  Conformer<double> c(4, 4, {}, true, rng);
  for (auto* layer : c.layers) {
    for (auto* ff : {layer->ff1, layer->ff2}) zero(ff->out->weight), zero(ff->out->bias);
    zero(layer->mhsa->o->weight), zero(layer->mhsa->o->bias);
    zero(layer->conv->pointwise_out->weight), zero(layer->conv->pointwise_out->bias);
  }
  auto x = T64::uniform({2, 4, 4, 7}, rng);
  EXPECT_EQ(max_abs_diff(c.forward(x, kEval), x), 0.0);
  Rng drop(1);
  EXPECT_EQ(max_abs_diff(c.forward(x, {Mode::kTrain, &drop}), x), 0.0);
}

TEST(Conformer, TransformerVariantHasNoConvModule) {
  Rng rng(7);
  Conformer<double> t(2, 4, {}, false, rng);
  for (const auto& p : t.parameters()) EXPECT_EQ(p.name.find("conv"), std::string::npos) << p.name;
  Conformer<double> c(2, 4, {}, true, rng);
  EXPECT_GT(c.count_parameters(), t.count_parameters());
}

TEST(Conformer, DropoutIsSeeded) {
  Rng rng(8);
  Conformer<double> c(2, 4, {}, true, rng);
  auto x = T64::uniform({1, 2, 4, 5}, rng);
  Rng a(42), b(42), other(43);
  auto ya = c.forward(x, {Mode::kTrain, &a});
  auto yb = c.forward(x, {Mode::kTrain, &b});
  auto yo = c.forward(x, {Mode::kTrain, &other});
  EXPECT_EQ(max_abs_diff(ya, yb), 0.0);
  EXPECT_GT(max_abs_diff(ya, yo), 0.0);
}

TEST(Conformer, Gradients) {
  Rng rng(9);
  ConformerConfig cfg;
  cfg.heads = 2;
  cfg.kernel = 3;
  for (bool with_conv : {true, false}) {
    Conformer<double> c(4, 4, cfg, with_conv, rng);  // d = 16
    randomize(c.parameters(), rng, 0.1);
    auto x = leaf({1, 4, 4, 6}, rng);  // S = 6
    auto ps = c.parameters();
    ps.push_back({"x", x});
    auto res = check_gradients([&] { return c.forward(x, kEval); }, ps, rng, 1e-6, 24);
    EXPECT_LT(res.max_rel_error, 1e-5) << res.worst_param << " " << res.worst_index << " "
                                      << res.worst_analytic << " vs " << res.worst_numeric;
  }
}

TEST(Cgab, ShapePreservation) {
  Rng rng(10);
  for (auto arr : {CgabArrangement::kParallel, CgabArrangement::kSeries}) {
    Cgab<double> g(16, 64, 48, arr, 1, BatchNormKind::kWhitened, rng);
    auto x = T64::uniform({2, 16, 64, 48}, rng);
    EXPECT_EQ(g.forward(x, kTrain).shape(), (Shape{2, 16, 64, 48}));
    EXPECT_THROW(g.forward(T64::zeros({2, 16, 64, 40}), kTrain), DimensionError);
  }
}

TEST(Cgab, ZeroInputGivesFuseBeta) {
  Rng rng(11);
  Cgab<double> g(3, 4, 5, CgabArrangement::kParallel, 3, BatchNormKind::kWhitened, rng);
  randomize(g.parameters(), rng);
  auto y = g.forward(T64::zeros({2, 3, 4, 5}), kTrain);
  auto cb = crelu(g.fuse_bn->beta);
  for (int64_t k = 0; k < y.numel(); ++k)
    EXPECT_LT(std::abs(y.flat(k) - cb.flat((k / 20) % 3)), 1e-12);
}

TEST(Cgab, Gradients) {
  Rng rng(12);
  for (auto arr : {CgabArrangement::kParallel, CgabArrangement::kSeries}) {
    Cgab<double> g(2, 4, 6, arr, 3, BatchNormKind::kWhitened, rng);
    randomize(g.parameters(), rng, 0.2);
    auto x = leaf({2, 2, 4, 6}, rng);
    auto ps = g.parameters();
    ps.push_back({"x", x});
    auto res = check_gradients([&] { return g.forward(x, kTrain); }, ps, rng, 1e-6, 24);
    EXPECT_LT(res.max_rel_error, 1e-5) << res.worst_param << " " << res.worst_index;
  }
}

TEST(Ftb, ShapeConstantAndPathReuse) {
  Rng rng(13);
  Ftb<double> big(16, 64, 48, 1, BatchNormKind::kWhitened, rng);
  EXPECT_EQ(big.forward(T64::uniform({2, 16, 64, 48}, rng), kTrain).shape(),
            (Shape{2, 16, 64, 48}));
  for (const auto& p : big.parameters()) EXPECT_NE(p.name.rfind("time", 0), 0u) << p.name;

  Ftb<double> f(3, 4, 5, 3, BatchNormKind::kWhitened, rng);
  randomize(f.parameters(), rng);
  auto y = f.forward(T64::zeros({2, 3, 4, 5}), kTrain);
  auto cb = crelu(f.out_bn->beta);
  for (int64_t k = 0; k < y.numel(); ++k)
    EXPECT_LT(std::abs(y.flat(k) - cb.flat((k / 20) % 3)), 1e-12);

  Cgab<double> g(3, 4, 5, CgabArrangement::kParallel, 3, BatchNormKind::kWhitened, rng);
  copy_parameters(*f.freq_path, *g.freq_path);
  auto x = T64::uniform({2, 3, 4, 5}, rng);
  EXPECT_EQ(max_abs_diff(f.freq_path->forward(x, kTrain), g.freq_path->forward(x, kTrain)), 0.0);

  auto xl = leaf({2, 3, 4, 5}, rng);
  auto ps = f.parameters();
  ps.push_back({"x", xl});
  auto res = check_gradients([&] { return f.forward(xl, kTrain); }, ps, rng, 1e-6, 24);
  EXPECT_LT(res.max_rel_error, 1e-5) << res.worst_param;
}

}  // namespace
}  // namespace ctft
