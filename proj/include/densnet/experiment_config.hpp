#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "densnet/dataset.hpp"

namespace densnet::exp {

/// Settings shared by every experiment. The text form is one `key = value`
/// per line with `#` comments; lists are comma separated.
struct ExperimentConfig {
  int experiment = 1;

  // data
  int n_train = 128;
  int n_test = 32;
  int n_molecules = 3;
  std::string basis_file;    // empty: built-in synthetic basis
  std::string dataset_file;  // empty: generate teacher data
  data::TeacherSettings teacher;

  // model
  std::vector<int> l_h = {0, 1, 2};
  int n_s = 8;
  int num_layers = 3;
  double cutoff = 3.5;
  std::string minimal_hidden = "15x0e+15x1o+15x2e";
  std::vector<int> lmax_o = {0, 1, 2, 3, 4};

  // training
  int epochs = 200;
  double learning_rate = 1e-2;
  double final_lr_fraction = 1.0;
  int batch_size = 8;
  int workers = 1;
  int probe_structures = 8;

  // evaluation
  double grid_spacing = 0.5;
  double grid_padding = 4.0;
  double plateau_tolerance = 0.05;

  /// Sub-seeds are derived from this one (see the seed accessors).
  std::uint64_t seed = 1;
  std::string out_dir = "out";

  std::uint64_t data_seed() const { return seed; }
  std::uint64_t teacher_seed() const { return seed + 1000; }
  std::uint64_t split_seed() const { return seed + 2000; }
  std::uint64_t model_seed() const { return seed + 3000; }
  std::uint64_t shuffle_seed() const { return seed + 4000; }

  void validate() const;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Sets one key from its text value; throws on unknown keys or bad values.
void set_option(ExperimentConfig& config, const std::string& key, const std::string& value);
ExperimentConfig parse_config(const std::string& text);
std::string format_config(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

}  // namespace densnet::exp
