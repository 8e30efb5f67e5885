#pragma once

#include <span>
#include <string>
#include <vector>

#include "densnet/experiment_config.hpp"
#include "densnet/report.hpp"
#include "densnet/train.hpp"

namespace densnet::exp {

struct Split {
  data::Dataset train;
  data::Dataset test;
};

/// Standard dataset of the config: loaded from dataset_file, or generated
/// clusters labeled by the teacher. Not yet split.
data::Dataset standard_dataset(const ExperimentConfig& config);
Split split_dataset(const data::Dataset& ds, const ExperimentConfig& config);

net::ModelConfig model_config(const ExperimentConfig& config, const IrrepsSpec& hidden,
                              const density::AuxiliaryBasis& basis);
TrainSettings train_settings(const ExperimentConfig& config);

/// First index i such that no later value falls below ys[i] * (1 - rel_tol).
/// Throws on an empty series.
std::size_t detect_plateau(std::span<const double> ys, double rel_tol);

/// Spectroscopic letter of l (s, p, d, f, g, ...).
std::string channel_label(int l);

/// A pass/fail line about a qualitative trend; never fails a run.
struct Advisory {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Experiment1Result {
  /// l_h, hidden, param_count, final_loss, eps_total, eps_<l>...
  Table table;
  std::vector<RunRecord> runs;
  std::vector<Advisory> advisories;
  data::Dataset test_set;
};

struct Experiment2Result {
  /// lmax_o, l_h, output_O, param_count, final_loss, eps_total
  Table table;
  /// lmax_o, plateau_l_h, plateau_eps_total
  Table plateau;
  std::vector<RunRecord> runs;
};

struct Experiment3Result {
  /// dataset, epoch, layer, l, channel, norm
  Table norms;
  std::vector<RunRecord> runs;  // standard, scaled
  std::vector<Advisory> advisories;
};

/// Error of one trained model per hidden_config(l_h, n_s).
Experiment1Result experiment1(const ExperimentConfig& config);
/// Error over truncated datasets x hidden configs, with the plateau l_h of
/// each truncation.
Experiment2Result experiment2(const ExperimentConfig& config);
/// Channel-norm trajectories of the minimal model on standard and scaled data.
Experiment3Result experiment3(const ExperimentConfig& config, const data::Dataset* standard = nullptr);

/// Writes the CSV, SVG, JSON and checkpoint artifacts into config.out_dir.
void write_outputs(const Experiment1Result& r, const ExperimentConfig& config);
void write_outputs(const Experiment2Result& r, const ExperimentConfig& config);
void write_outputs(const Experiment3Result& r, const ExperimentConfig& config);

}  // namespace densnet::exp
