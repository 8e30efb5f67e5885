#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "densnet/dataset.hpp"
#include "densnet/model.hpp"
#include "densnet/report.hpp"

namespace densnet::exp {

struct TrainSettings {
  int epochs = 200;
  double learning_rate = 1e-2;
  /// Learning rate decays geometrically to learning_rate * final_lr_fraction
  /// over the run; 1 keeps it constant.
  double final_lr_fraction = 1.0;
  int batch_size = 8;
  std::uint64_t shuffle_seed = 0;
  int workers = 1;
  /// The first probe_structures training structures feed channel_norms.
  int probe_structures = 8;
  double grid_spacing = 0.5;
  double grid_padding = 4.0;
};

struct EvalResult {
  /// Means over the evaluated structures, in percent.
  double eps_total = 0.0;
  std::map<int, double> eps_l;
  /// Coefficient MSE over the whole set.
  double loss = 0.0;
};

struct RunRecord {
  std::string label;
  net::ModelConfig model;
  TrainSettings settings;
  std::size_t param_count = 0;
  /// Mean training loss seen during each epoch (before each batch update).
  std::vector<double> epoch_loss;
  /// norms[epoch][layer][l] after each epoch, pooled over the probe set.
  std::vector<std::vector<std::map<int, double>>> norms;
  EvalResult final_eval;
  double wall_seconds = 0.0;
  std::vector<double> params;
};

/// Mean density errors of `model` against the labels of `ds`.
EvalResult evaluate(const net::Model& model, const data::Dataset& ds, double spacing, double padding);

/// Channel norms of every hidden layer pooled over the given structures.
std::vector<std::map<int, double>> probe_norms(const net::Model& model, const std::vector<net::StructureInput>& probe);

/// Adam on coefficient MSE with seeded per-epoch shuffling, then evaluation
/// on `test`. Deterministic for fixed inputs. Throws with the epoch index if
/// the loss or a gradient becomes non-finite.
RunRecord train(const net::ModelConfig& config, const data::Dataset& train_set, const data::Dataset& test_set,
                const TrainSettings& settings, const std::string& label = "run");

/// epoch,loss
Table loss_table(const RunRecord& record);
/// epoch,layer,l,norm
Table norm_table(const RunRecord& record);

}  // namespace densnet::exp
