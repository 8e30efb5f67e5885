#include "densnet/train.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "densnet/density.hpp"
#include "densnet/error.hpp"
#include "densnet/features.hpp"
#include "densnet/optimizer.hpp"

namespace densnet::exp {

EvalResult evaluate(const net::Model& model, const data::Dataset& ds, double spacing, double padding) {
  if (ds.size() == 0) throw Error("evaluate: empty dataset");
  EvalResult r;
  double sq = 0.0;
  std::size_t count = 0;
  for (const auto& s : ds.structures) {
    const auto pred = model.forward(s.geometry);
    const auto grid = density::make_grid(s.geometry, spacing, padding);
    const auto e = density::density_errors(s.geometry, ds.basis, s.coeffs, pred, grid);
    r.eps_total += e.total;
    for (const auto& [l, v] : e.per_l) r.eps_l[l] += v;
    for (std::size_t a = 0; a < pred.atoms.size(); ++a)
      for (std::size_t k = 0; k < pred.atoms[a].size(); ++k) {
        const double d = pred.atoms[a][k] - s.coeffs.atoms[a][k];
        sq += d * d;
      }
    count += s.coeffs.num_values();
  }
  const double n = static_cast<double>(ds.size());
  r.eps_total /= n;
  for (auto& [l, v] : r.eps_l) v /= n;
  r.loss = sq / static_cast<double>(count);
  return r;
}

std::vector<std::map<int, double>> probe_norms(const net::Model& model, const std::vector<net::StructureInput>& probe) {
  std::vector<net::ChannelNormAccumulator> acc(static_cast<std::size_t>(model.config().num_layers));
  for (const auto& in : probe) {
    const auto feats = model.hidden_features(in);
    for (std::size_t k = 0; k < feats.size(); ++k) acc[k].add(feats[k]);
  }
  std::vector<std::map<int, double>> out;
  for (const auto& a : acc) out.push_back(a.result());
  return out;
}

RunRecord train(const net::ModelConfig& config, const data::Dataset& train_set, const data::Dataset& test_set,
                const TrainSettings& settings, const std::string& label) {
  if (settings.epochs < 1) throw Error("train: epochs must be >= 1");
  if (settings.batch_size < 1) throw Error("train: batch_size must be >= 1");
  if (!(settings.final_lr_fraction > 0.0 && settings.final_lr_fraction <= 1.0))
    throw Error("train: final_lr_fraction must be in (0, 1]");
  if (train_set.size() == 0) throw Error("train: empty training set");
  const auto t0 = std::chrono::steady_clock::now();

  net::Model model(config);
  RunRecord rec;
  rec.label = label;
  rec.model = config;
  rec.settings = settings;
  rec.param_count = model.param_count();

  std::vector<net::StructureInput> inputs;
  inputs.reserve(train_set.size());
  for (const auto& s : train_set.structures) inputs.push_back(model.prepare(s.geometry));
  const std::size_t n_probe = std::min<std::size_t>(static_cast<std::size_t>(settings.probe_structures), inputs.size());
  const std::vector<net::StructureInput> probe(inputs.begin(), inputs.begin() + static_cast<long>(n_probe));

  net::OptimizerState state(model.param_count());
  net::AdamParams hp{.lr = settings.learning_rate};
  std::mt19937_64 rng(settings.shuffle_seed);
  std::vector<std::size_t> order(inputs.size());
  for (int epoch = 0; epoch < settings.epochs; ++epoch) {
    const double progress = settings.epochs > 1 ? static_cast<double>(epoch) / (settings.epochs - 1) : 0.0;
    hp.lr = settings.learning_rate * std::pow(settings.final_lr_fraction, progress);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    double sq = 0.0;
    std::size_t count = 0;
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(settings.batch_size)) {
      const std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(settings.batch_size));
      std::vector<net::Sample> batch;
      std::size_t n_values = 0;
      for (std::size_t k = b; k < e; ++k) {
        batch.push_back({&inputs[order[k]], &train_set.structures[order[k]].coeffs});
        n_values += train_set.structures[order[k]].coeffs.num_values();
      }
      const auto g = net::gradient(model, batch, settings.workers);
      if (!std::isfinite(g.loss)) throw Error("train: non-finite loss at epoch " + std::to_string(epoch + 1));
      try {
        net::adam_step(model.mutable_params(), g.grad, state, hp);
      } catch (const Error& err) {
        throw Error("train: epoch " + std::to_string(epoch + 1) + ": " + err.what());
      }
      sq += g.loss * static_cast<double>(n_values);
      count += n_values;
    }
    rec.epoch_loss.push_back(sq / static_cast<double>(count));
    rec.norms.push_back(probe_norms(model, probe));
    for (const auto& layer : rec.norms.back())
      for (const auto& [l, v] : layer)
        if (!std::isfinite(v)) throw Error("train: non-finite feature norm at epoch " + std::to_string(epoch + 1));
  }

  rec.final_eval = evaluate(model, test_set, settings.grid_spacing, settings.grid_padding);
  if (!std::isfinite(rec.final_eval.eps_total)) throw Error("train: non-finite test error");
  rec.params.assign(model.params().begin(), model.params().end());
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

Table loss_table(const RunRecord& r) {
  Table t({"epoch", "loss"});
  for (std::size_t e = 0; e < r.epoch_loss.size(); ++e) t.add_row({e + 1, r.epoch_loss[e]});
  return t;
}

Table norm_table(const RunRecord& r) {
  Table t({"epoch", "layer", "l", "norm"});
  for (std::size_t e = 0; e < r.norms.size(); ++e)
    for (std::size_t k = 0; k < r.norms[e].size(); ++k)
      for (const auto& [l, v] : r.norms[e][k]) t.add_row({e + 1, k + 1, l, v});
  return t;
}

}  // namespace densnet::exp
