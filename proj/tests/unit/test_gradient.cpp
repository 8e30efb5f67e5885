#include <gtest/gtest.h>

#include "densnet/error.hpp"
#include "densnet/model.hpp"
#include "densnet/optimizer.hpp"
#include "support.hpp"

using namespace densnet;
using namespace densnet::net;

namespace {

Geometry oh_pair() {
  Geometry g;
  g.species = {Species::O, Species::H};
  g.positions = {so3::Vec3(0.1, -0.2, 0.05), so3::Vec3(0.7, 0.5, 0.4)};
  return g;
}

ModelConfig toy_config() {
  ModelConfig c;
  c.num_layers = 1;
  c.hidden_spec = hidden_config(1, 2);
  c.output_spec = {IrrepsSpec::parse("2x0e+1x1o+1x2e"), IrrepsSpec::parse("3x0e+2x1o+1x2e+1x3o")};
  c.seed = 21;
  return c;
}

DensityCoefficients shifted(const DensityCoefficients& c, double delta) {
  auto out = c;
  double k = 0.0;
  for (auto& a : out.atoms)
    for (auto& v : a) v += delta * std::sin(k += 1.0);
  return out;
}

/// Five-point central difference.
double numeric_derivative(const Model& m, const StructureInput& in, const DensityCoefficients& target, std::size_t k,
                          double h) {
  const auto loss_at = [&](double d) {
    Model q = m;
    q.mutable_params()[k] += d;
    return loss_mse(q.forward(in), target);
  };
  return (8.0 * (loss_at(h) - loss_at(-h)) - (loss_at(2 * h) - loss_at(-2 * h))) / (12.0 * h);
}

}  // namespace

TEST(Gradient, MatchesFiniteDifferencesOnToyModel) {
  const Model m(toy_config());
  const auto in = m.prepare(oh_pair());
  const auto target = shifted(m.forward(in), 0.5);
  const Sample s{&in, &target};
  const auto g = gradient(m, std::span(&s, 1));
  EXPECT_NEAR(g.loss, loss_mse(m.forward(in), target), 1e-15);
  std::mt19937_64 rng(1);
  int bad = 0;
  const int n = 200;
  for (int t = 0; t < n; ++t) {
    const std::size_t k = rng() % m.param_count();
    const double fd = numeric_derivative(m, in, target, k, 1e-3);
    const double scale = std::max({std::abs(fd), std::abs(g.grad[k]), 1e-12});
    if (std::abs(fd - g.grad[k]) / scale > 1e-5) ++bad;
  }
  EXPECT_LE(bad, n / 100);
}

TEST(Gradient, MatchesFiniteDifferencesOnDeskModelBatch) {
  const auto c = testing_support::desk_config(2, 5, 2, 31);
  const Model m(c);
  const auto geoms = data::generate_clusters(2, 2, 6);
  std::vector<StructureInput> ins;
  std::vector<DensityCoefficients> targets;
  for (const auto& g : geoms) {
    ins.push_back(m.prepare(g));
    targets.push_back(shifted(m.forward(ins.back()), 0.3));
  }
  std::vector<Sample> batch = {{&ins[0], &targets[0]}, {&ins[1], &targets[1]}};
  const auto g = gradient(m, batch);
  std::mt19937_64 rng(2);
  int bad = 0;
  for (int t = 0; t < 60; ++t) {
    const std::size_t k = rng() % m.param_count();
    const auto loss_at = [&](double d) {
      Model q = m;
      q.mutable_params()[k] += d;
      double sq = 0.0;
      std::size_t n = 0;
      for (int i = 0; i < 2; ++i) {
        sq += loss_mse(q.forward(ins[i]), targets[i]) * static_cast<double>(targets[i].num_values());
        n += targets[i].num_values();
      }
      return sq / static_cast<double>(n);
    };
    const double h = 1e-3;
    const double fd = (8.0 * (loss_at(h) - loss_at(-h)) - (loss_at(2 * h) - loss_at(-2 * h))) / (12.0 * h);
    const double scale = std::max(std::abs(fd), std::abs(g.grad[k]));
    if (std::abs(fd - g.grad[k]) > 1e-5 * scale + 1e-11) ++bad;
  }
  EXPECT_LE(bad, 1);
}

TEST(Gradient, VanishesAtExactFit) {
  const Model m(toy_config());
  const auto in = m.prepare(oh_pair());
  const auto target = m.forward(in);
  const Sample s{&in, &target};
  const auto g = gradient(m, std::span(&s, 1));
  EXPECT_EQ(g.loss, 0.0);
  for (double v : g.grad) EXPECT_LT(std::abs(v), 1e-10);
}

TEST(Gradient, ZeroOutputLayerBlocksUpstreamGradient) {
  Model m(testing_support::desk_config(1, 4, 2, 5));
  const auto& last = m.layers().back();
  for (int k = last.param_begin; k < last.param_end; ++k) m.mutable_params()[static_cast<std::size_t>(k)] = 0.0;
  const auto in = m.prepare(data::generate_clusters(1, 2, 7)[0]);
  auto target = m.forward(in);
  for (auto& a : target.atoms)
    for (auto& v : a) {
      EXPECT_EQ(v, 0.0);
      v = 0.0;
    }
  const Sample s{&in, &target};
  const auto g = gradient(m, std::span(&s, 1));
  for (int k = 0; k < last.param_begin; ++k) EXPECT_EQ(g.grad[static_cast<std::size_t>(k)], 0.0);
}

TEST(Gradient, IndependentOfWorkerCount) {
  const Model m(testing_support::desk_config(1, 4, 2, 8));
  const auto geoms = data::generate_clusters(5, 2, 8);
  std::vector<StructureInput> ins;
  std::vector<DensityCoefficients> targets;
  for (const auto& g : geoms) {
    ins.push_back(m.prepare(g));
    targets.push_back(shifted(m.forward(ins.back()), 0.2));
  }
  std::vector<Sample> batch;
  for (std::size_t i = 0; i < ins.size(); ++i) batch.push_back({&ins[i], &targets[i]});
  const auto one = gradient(m, batch, 1);
  for (int w : {2, 3, 8}) {
    const auto many = gradient(m, batch, w);
    EXPECT_EQ(many.loss, one.loss);
    EXPECT_EQ(many.grad, one.grad);
  }
  EXPECT_THROW(gradient(m, std::span<const Sample>()), Error);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  std::vector<double> p = {1.0, -2.0, 3.0};
  const auto before = p;
  OptimizerState st(3);
  adam_step(p, std::vector<double>(3, 0.0), st);
  EXPECT_EQ(p, before);
  EXPECT_EQ(st.step, 1);
}

TEST(Adam, FirstStepMovesByLearningRateAgainstGradientSign) {
  std::vector<double> p = {0.0, 0.0, 0.0, 0.0};
  const std::vector<double> g = {0.3, -2.0, 1e-3, -7e4};
  OptimizerState st(4);
  adam_step(p, g, st, {.lr = 0.01});
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], -0.01 * (g[i] > 0 ? 1 : -1), 1e-7);
}

TEST(Adam, AgreesWithReferenceUpdateBitForBit) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  const std::size_t dim = 50;
  std::vector<double> p(dim), q(dim), m(dim, 0.0), v(dim, 0.0);
  for (auto& x : p) x = n(rng);
  q = p;
  OptimizerState st(dim);
  const AdamParams hp{.lr = 3e-3, .beta1 = 0.8, .beta2 = 0.99, .eps = 1e-7};
  for (int t = 1; t <= 20; ++t) {
    std::vector<double> g(dim);
    for (auto& x : g) x = n(rng);
    adam_step(p, g, st, hp);
    for (std::size_t i = 0; i < dim; ++i) {
      m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * g[i];
      v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * g[i] * g[i];
      const double mhat = m[i] / (1.0 - std::pow(hp.beta1, t));
      const double vhat = v[i] / (1.0 - std::pow(hp.beta2, t));
      q[i] -= hp.lr * mhat / (std::sqrt(vhat) + hp.eps);
    }
  }
  EXPECT_EQ(p, q);
}

TEST(Adam, RejectsNonFiniteAndMismatchedInput) {
  std::vector<double> p = {1.0, 2.0};
  OptimizerState st(2);
  EXPECT_THROW(adam_step(p, std::vector<double>{1.0, NAN}, st), Error);
  EXPECT_EQ(p, (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(st.step, 0);
  EXPECT_THROW(adam_step(p, std::vector<double>{1.0}, st), Error);
}
