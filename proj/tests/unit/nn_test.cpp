#include <gtest/gtest.h>

#include <cmath>

#include "pseudorep/errors.hpp"
#include "pseudorep/nn.hpp"

namespace pseudorep::nn {
namespace {

using M = Matrix<double>;

LayerSpec conv(std::size_t c, std::size_t h, std::size_t w, std::size_t f) {
  LayerSpec s;
  s.kind = LayerKind::Conv2d;
  s.name = "conv";
  s.channels = c;
  s.height = h;
  s.width = w;
  s.filters = f;
  return s;
}

LayerSpec dense(std::string name, std::size_t in, std::size_t out) {
  LayerSpec s;
  s.kind = LayerKind::Dense;
  s.name = std::move(name);
  s.in_features = in;
  s.out_features = out;
  return s;
}

LayerSpec simple(LayerKind kind, std::string name, std::size_t width, double rate = 0.0) {
  LayerSpec s;
  s.kind = kind;
  s.name = std::move(name);
  s.in_features = width;
  s.rate = rate;
  return s;
}

LayerSpec pool(std::size_t c, std::size_t h, std::size_t w) {
  LayerSpec s = conv(c, h, w, 0);
  s.kind = LayerKind::MaxPool2;
  s.name = "pool";
  return s;
}

Architecture arch_of(std::size_t input, std::vector<LayerSpec> layers) {
  Architecture a;
  a.id = "t";
  a.input_size = input;
  a.layers = std::move(layers);
  a.taps = {{"input", 0}};
  a.validate();
  return a;
}

M random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  M m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

TEST(Network, ConvMatchesDirectCrossCorrelation) {
  std::mt19937_64 rng(1);
  const std::size_t c = 2, h = 5, w = 4, f = 3;
  Network<double> net(arch_of(c * h * w, {conv(c, h, w, f)}));
  net.initialize(rng);
  net.parameters()[1].value = random_matrix(1, f, rng);
  const M x = random_matrix(2, static_cast<Eigen::Index>(c * h * w), rng);
  const M y = net.infer(x);
  const M& wt = net.parameters()[0].value;
  const M& b = net.parameters()[1].value;
  for (Eigen::Index n = 0; n < 2; ++n) {
    for (std::size_t ff = 0; ff < f; ++ff) {
      for (std::size_t yy = 0; yy < h; ++yy) {
        for (std::size_t xx = 0; xx < w; ++xx) {
          double want = b(0, static_cast<Eigen::Index>(ff));
          for (std::size_t cc = 0; cc < c; ++cc) {
            for (int ky = 0; ky < 3; ++ky) {
              for (int kx = 0; kx < 3; ++kx) {
                const long iy = static_cast<long>(yy) + ky - 1, ix = static_cast<long>(xx) + kx - 1;
                if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(w)) continue;
                want += wt(static_cast<Eigen::Index>(ff), static_cast<Eigen::Index>((cc * 3 + ky) * 3 + kx)) *
                        x(n, static_cast<Eigen::Index>(cc * h * w + iy * w + ix));
              }
            }
          }
          EXPECT_NEAR(y(n, static_cast<Eigen::Index>(ff * h * w + yy * w + xx)), want, 1e-12);
        }
      }
    }
  }
}

TEST(Network, MaxPoolTakesBlockMaxima) {
  Network<double> net(arch_of(1 * 4 * 5, {pool(1, 4, 5)}));
  M x(1, 20);
  for (int i = 0; i < 20; ++i) x(0, i) = std::sin(i * 1.7);
  const M y = net.infer(x);
  ASSERT_EQ(y.cols(), 4);
  for (int oy = 0; oy < 2; ++oy) {
    for (int ox = 0; ox < 2; ++ox) {
      double m = -1e9;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) m = std::max(m, x(0, (2 * oy + dy) * 5 + 2 * ox + dx));
      }
      EXPECT_EQ(y(0, oy * 2 + ox), m);
    }
  }
}

TEST(Network, InferEqualsEvalForwardAndDropoutIsIdentityAtInference) {
  std::mt19937_64 rng(2);
  Network<double> net(arch_of(6, {dense("a", 6, 8), simple(LayerKind::ReLU, "r", 8),
                                  simple(LayerKind::Dropout, "d", 8, 0.5), dense("b", 8, 3)}));
  net.initialize(rng);
  const M x = random_matrix(4, 6, rng);
  const M a = net.infer(x);
  const M b = net.forward(x, false);
  EXPECT_EQ((a - b).cwiseAbs().maxCoeff(), 0.0);
  const M part = net.infer(net.infer(x, 0, 2), 2);
  EXPECT_LT((part - a).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Network, InvertedDropoutKeepsTheMean) {
  std::mt19937_64 rng(3);
  Network<double> net(arch_of(1000, {simple(LayerKind::Dropout, "d", 1000, 0.3)}));
  net.seed_dropout(5);
  const M x = M::Ones(20, 1000);
  const M y = net.forward(x, true);
  std::size_t zeros = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y.data()[i] == 0.0) {
      ++zeros;
    } else {
      EXPECT_NEAR(y.data()[i], 1.0 / 0.7, 1e-12);
    }
  }
  EXPECT_NEAR(static_cast<double>(zeros) / 20000.0, 0.3, 0.02);
}

double loss_of(Network<double>& net, const M& x, const M& t) {
  M g;
  return softmax_cross_entropy(net.forward(x, false), t, g);
}

TEST(Network, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  Network<double> net(arch_of(2 * 4 * 4, {conv(2, 4, 4, 3), simple(LayerKind::ReLU, "r", 48),
                                          pool(3, 4, 4), dense("fc", 12, 4)}));
  net.initialize(rng);
  const M x = random_matrix(3, 32, rng);
  M t = M::Zero(3, 4);
  t(0, 1) = t(1, 3) = t(2, 0) = 1.0;
  net.zero_grad();
  M g;
  softmax_cross_entropy(net.forward(x, false), t, g);
  const M gin = net.backward(g, true);
  const double h = 1e-6;
  for (auto& p : net.parameters()) {
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      const double keep = p.value.data()[i];
      p.value.data()[i] = keep + h;
      const double up = loss_of(net, x, t);
      p.value.data()[i] = keep - h;
      const double down = loss_of(net, x, t);
      p.value.data()[i] = keep;
      EXPECT_NEAR(p.grad.data()[i], (up - down) / (2 * h), 1e-6) << p.name << "[" << i << "]";
    }
  }
  M xp = x;
  for (Eigen::Index i = 0; i < x.size(); i += 5) {
    xp.data()[i] = x.data()[i] + h;
    const double up = loss_of(net, xp, t);
    xp.data()[i] = x.data()[i] - h;
    const double down = loss_of(net, xp, t);
    xp.data()[i] = x.data()[i];
    EXPECT_NEAR(gin.data()[i], (up - down) / (2 * h), 1e-6);
  }
}

TEST(Losses, SoftmaxRowsAreDistributions) {
  std::mt19937_64 rng(5);
  M logits = random_matrix(50, 7, rng) * 40.0;
  logits(0, 0) = 800.0;
  const M p = softmax(logits);
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    EXPECT_NEAR(p.row(r).sum(), 1.0, 1e-12);
    EXPECT_GE(p.row(r).minCoeff(), 0.0);
  }
  EXPECT_TRUE(p.allFinite());
}

TEST(Losses, CrossEntropyValueAndGradient) {
  M logits(1, 3);
  logits << 1.0, 2.0, 0.5;
  M t(1, 3);
  t << 0.0, 1.0, 0.0;
  M g;
  const double l = softmax_cross_entropy(logits, t, g);
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(0.5);
  EXPECT_NEAR(l, -std::log(std::exp(2.0) / z), 1e-12);
  EXPECT_NEAR(g(0, 1), std::exp(2.0) / z - 1.0, 1e-12);
  EXPECT_NEAR(g.sum(), 0.0, 1e-12);
}

TEST(Losses, SigmoidLosses) {
  M logits(2, 2);
  logits << 0.0, 1.0, -2.0, 3.0;
  M t(2, 2);
  t << 0.5, 1.0, 0.0, 0.2;
  M g;
  const double mse = sigmoid_mse(logits, t, g);
  double want = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double s = 1.0 / (1.0 + std::exp(-logits.data()[i]));
    want += (s - t.data()[i]) * (s - t.data()[i]);
  }
  EXPECT_NEAR(mse, want / 4.0, 1e-12);
  const double bce = sigmoid_bce(logits, t, g);
  double wb = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double s = 1.0 / (1.0 + std::exp(-logits.data()[i]));
    wb -= t.data()[i] * std::log(s) + (1 - t.data()[i]) * std::log(1 - s);
  }
  EXPECT_NEAR(bce, wb / 2.0, 1e-12);
}

TEST(Architecture, JsonRoundTripAndValidation) {
  Architecture a = arch_of(32, {conv(2, 4, 4, 3), simple(LayerKind::ReLU, "r", 48), pool(3, 4, 4),
                                dense("fc", 12, 4)});
  a.taps.push_back({"flatten", 3});
  const Architecture b = architecture_from_json(to_json(a));
  EXPECT_EQ(to_json(b).dump(), to_json(a).dump());
  EXPECT_EQ(b.tap_index("flatten"), 3u);
  EXPECT_EQ(b.width_at(3), 12u);
  Architecture bad = a;
  bad.layers.back().in_features = 13;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Network, CopyParametersAcrossScalarTypes) {
  std::mt19937_64 rng(6);
  const Architecture a = arch_of(5, {dense("a", 5, 3)});
  Network<float> f(a);
  f.initialize(rng);
  Network<double> d(a);
  d.copy_parameters_from(f);
  EXPECT_EQ(d.parameter_count(), 18u);
  EXPECT_EQ(static_cast<float>(d.parameters()[0].value(1, 2)), f.parameters()[0].value(1, 2));
}

}  // namespace
}  // namespace pseudorep::nn
