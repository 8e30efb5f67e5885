#pragma once

#include <string>

#include "densnet/model.hpp"

namespace densnet::net {

/// Line-oriented checkpoint, version 1:
///
///   densnet-checkpoint 1
///   num_layers <int>
///   hidden_spec <irreps>
///   output_spec_H <irreps>
///   output_spec_O <irreps>
///   lmax_sh <int, -1 = automatic>
///   cutoff <double>
///   radial_basis_size <int>
///   radial_hidden_width <int>
///   avg_num_neighbors <double>
///   self_connection <0|1>
///   seed <uint64>
///   params <count>
///   <count lines, one parameter each, %.17g>
///   end
///
/// Parameters follow the layer planning order of plan_layers().
std::string format_checkpoint(const Model& model);
Model parse_checkpoint(const std::string& text);

void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace densnet::net
