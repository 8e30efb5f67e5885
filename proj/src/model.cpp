#include "densnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "conv_kernels.hpp"
#include "densnet/error.hpp"

namespace densnet::net {

int ModelConfig::resolved_lmax_sh() const {
  if (lmax_sh >= 0) return lmax_sh;
  int l = hidden_spec.lmax();
  for (const auto& s : output_spec) l = std::max(l, s.lmax());
  return std::max(l, 0);
}

void ModelConfig::validate() const {
  if (num_layers < 1) throw Error("model config: num_layers must be >= 1");
  if (hidden_spec.empty()) throw Error("model config: empty hidden spec");
  for (const auto& s : output_spec)
    if (s.empty()) throw Error("model config: empty output spec");
  if (resolved_lmax_sh() > so3::kMaxL) throw Error("model config: lmax_sh exceeds 8");
  if (hidden_spec.lmax() > so3::kMaxL) throw Error("model config: hidden l exceeds 8");
  for (const auto& s : output_spec)
    if (s.lmax() > so3::kMaxL) throw Error("model config: output l exceeds 8");
  if (!(cutoff > 0.0)) throw Error("model config: cutoff must be positive");
  if (radial_basis_size < 1 || radial_hidden_width < 1) throw Error("model config: radial sizes must be >= 1");
  if (!(avg_num_neighbors > 0.0)) throw Error("model config: avg_num_neighbors must be positive");
}

IrrepsSpec GateLayout::input_spec() const {
  std::vector<MulIrrep> c(scalars.begin(), scalars.end());
  c.insert(c.end(), gates.begin(), gates.end());
  c.insert(c.end(), gated.begin(), gated.end());
  return IrrepsSpec(std::move(c));
}

IrrepsSpec GateLayout::output_spec() const {
  std::vector<MulIrrep> c(scalars.begin(), scalars.end());
  c.insert(c.end(), gated.begin(), gated.end());
  return IrrepsSpec(std::move(c));
}

namespace {

bool path_allowed(const Irrep& in, int l_sh, const Irrep& out) {
  return out.parity == in.parity * sh_parity(l_sh) && out.l >= std::abs(in.l - l_sh) && out.l <= in.l + l_sh;
}

bool reachable(const IrrepsSpec& in, const Irrep& target, int lmax_sh) {
  for (const auto& c : in)
    for (int lf = 0; lf <= lmax_sh; ++lf)
      if (path_allowed(c.irrep, lf, target)) return true;
  return false;
}

std::vector<int> channel_offsets(const IrrepsSpec& spec) {
  std::vector<int> off;
  int o = 0;
  for (const auto& c : spec) {
    off.push_back(o);
    o += c.dim();
  }
  return off;
}

// Linear blocks onto every channel of `dst` from the channels of `src` that
// carry the same irrep, each destination normalized by its total fan-in.
std::vector<LinearBlock> linear_blocks(const IrrepsSpec& src, const IrrepsSpec& dst, int& offset) {
  std::vector<LinearBlock> blocks;
  const auto src_off = channel_offsets(src);
  const auto dst_off = channel_offsets(dst);
  for (std::size_t d = 0; d < dst.size(); ++d) {
    const int fan = src.count(dst[d].irrep);
    if (fan == 0) continue;
    for (std::size_t s = 0; s < src.size(); ++s) {
      if (src[s].irrep != dst[d].irrep) continue;
      LinearBlock b;
      b.src_offset = src_off[s];
      b.src_mul = src[s].mul;
      b.dst_offset = dst_off[d];
      b.dst_mul = dst[d].mul;
      b.block_dim = dst[d].irrep.dim();
      b.weight_offset = offset;
      b.scale = 1.0 / std::sqrt(static_cast<double>(fan));
      offset += b.src_mul * b.dst_mul;
      blocks.push_back(b);
    }
  }
  return blocks;
}

ConvLayer make_conv(const IrrepsSpec& in_spec, const std::array<IrrepsSpec, kNumSpecies>& out_spec, int mix_groups,
                    const ModelConfig& config, int& offset) {
  const int lmax_sh = config.resolved_lmax_sh();
  ConvLayer layer;
  layer.in_spec = in_spec;
  layer.out_spec = out_spec;
  layer.mix_groups = mix_groups;

  std::vector<Irrep> targets;
  for (const auto& spec : out_spec)
    for (const auto& c : spec)
      if (std::find(targets.begin(), targets.end(), c.irrep) == targets.end()) targets.push_back(c.irrep);

  const auto in_off = channel_offsets(in_spec);
  std::vector<MulIrrep> mid;
  int mid_offset = 0;
  for (std::size_t ci = 0; ci < in_spec.size(); ++ci) {
    const MulIrrep& c = in_spec[ci];
    for (int lf = 0; lf <= lmax_sh; ++lf) {
      for (const Irrep& t : targets) {
        if (!path_allowed(c.irrep, lf, t)) continue;
        TensorPath p;
        p.in_channel = static_cast<int>(ci);
        p.in_offset = in_off[ci];
        p.mul = c.mul;
        p.l_in = c.irrep.l;
        p.l_sh = lf;
        p.out = t;
        p.mid_offset = mid_offset;
        p.weight_offset = layer.radial_outputs;
        const KernelKey key{c.irrep.l, lf, t.l};
        auto it = std::find(layer.kernels.begin(), layer.kernels.end(), key);
        p.kernel = static_cast<int>(it - layer.kernels.begin());
        if (it == layer.kernels.end()) layer.kernels.push_back(key);
        layer.paths.push_back(p);
        mid.push_back({c.mul, t});
        mid_offset += c.mul * t.dim();
        layer.radial_outputs += c.mul;
      }
    }
  }
  layer.mid_spec = IrrepsSpec(std::move(mid));

  layer.param_begin = offset;
  layer.w1_offset = offset;
  offset += config.radial_basis_size * config.radial_hidden_width;
  layer.w2_offset = offset;
  offset += config.radial_hidden_width * layer.radial_outputs;
  for (int g = 0; g < mix_groups; ++g) {
    layer.mix[static_cast<std::size_t>(g)] = linear_blocks(layer.mid_spec, out_spec[static_cast<std::size_t>(g)], offset);
  }
  if (config.self_connection) {
    for (int s = 0; s < kNumSpecies; ++s)
      layer.self[static_cast<std::size_t>(s)] = linear_blocks(in_spec, out_spec[static_cast<std::size_t>(s)], offset);
  }
  layer.param_end = offset;
  return layer;
}

}  // namespace

std::vector<ConvLayer> plan_layers(const ModelConfig& config) {
  config.validate();
  const int lmax_sh = config.resolved_lmax_sh();
  std::vector<ConvLayer> layers;
  IrrepsSpec in_spec = IrrepsSpec::parse("2x0e");
  int offset = 0;
  for (int k = 0; k < config.num_layers; ++k) {
    std::vector<MulIrrep> scalars, gated;
    int num_gates = 0;
    for (const auto& c : config.hidden_spec) {
      if (!reachable(in_spec, c.irrep, lmax_sh)) continue;
      if (c.irrep.is_scalar()) {
        scalars.push_back(c);
      } else {
        gated.push_back(c);
        num_gates += c.mul;
      }
    }
    const Irrep gate_irrep(0, Parity::even);
    if (num_gates > 0 && !reachable(in_spec, gate_irrep, lmax_sh))
      throw Error("model: gate scalars are unreachable in layer " + std::to_string(k));
    if (scalars.empty() && gated.empty())
      throw Error("model: no hidden channel is reachable in layer " + std::to_string(k));
    GateLayout gl;
    gl.scalars = IrrepsSpec(std::move(scalars));
    if (num_gates > 0) gl.gates = IrrepsSpec({{num_gates, gate_irrep}});
    gl.gated = IrrepsSpec(std::move(gated));
    const IrrepsSpec conv_out = gl.input_spec();
    ConvLayer layer = make_conv(in_spec, {conv_out, conv_out}, 1, config, offset);
    layer.gated = true;
    layer.gate = gl;
    in_spec = gl.output_spec();
    layers.push_back(std::move(layer));
  }
  for (const auto& spec : config.output_spec)
    for (const auto& c : spec)
      if (!reachable(in_spec, c.irrep, lmax_sh))
        throw Error("model: output irrep " + c.irrep.str() + " is unreachable from the last hidden layer");
  layers.push_back(make_conv(in_spec, config.output_spec, kNumSpecies, config, offset));
  return layers;
}

std::size_t param_count(const ModelConfig& config) {
  const auto layers = plan_layers(config);
  return static_cast<std::size_t>(layers.back().param_end);
}

Model::Model(ModelConfig config) : config_(std::move(config)), layers_(plan_layers(config_)) {
  params_.resize(static_cast<std::size_t>(layers_.back().param_end));
  std::mt19937_64 rng(config_.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& p : params_) p = normal(rng);
}

Model::Model(ModelConfig config, std::vector<double> params)
    : config_(std::move(config)), layers_(plan_layers(config_)), params_(std::move(params)) {
  if (params_.size() != static_cast<std::size_t>(layers_.back().param_end))
    throw Error("model: parameter vector has " + std::to_string(params_.size()) + " entries, expected " +
                std::to_string(layers_.back().param_end));
  for (double p : params_)
    if (!std::isfinite(p)) throw Error("model: non-finite parameter");
}

StructureInput Model::prepare(const Geometry& geometry) const {
  StructureInput in;
  in.graph = build_graph(geometry, config_.cutoff);
  in.lmax_sh = config_.resolved_lmax_sh();
  const std::size_t nsh = static_cast<std::size_t>((in.lmax_sh + 1) * (in.lmax_sh + 1));
  const std::size_t nb = static_cast<std::size_t>(config_.radial_basis_size);
  in.sh.resize(nsh * in.graph.edges.size());
  in.radial.resize(nb * in.graph.edges.size());
  for (std::size_t e = 0; e < in.graph.edges.size(); ++e) {
    const Edge& edge = in.graph.edges[e];
    const so3::Vec3 dir = edge.displacement / edge.distance;
    so3::solid_harmonics(in.lmax_sh, dir.x(), dir.y(), dir.z(), std::span<double>(in.sh.data() + e * nsh, nsh));
    radial_basis(edge.distance, config_.cutoff, std::span<double>(in.radial.data() + e * nb, nb));
  }
  return in;
}

FeatureTensor species_features(const Graph& graph) {
  FeatureTensor f(IrrepsSpec::parse("2x0e"), graph.num_nodes());
  for (int i = 0; i < graph.num_nodes(); ++i) {
    const auto oh = Graph::one_hot(graph.species[static_cast<std::size_t>(i)]);
    std::copy(oh.begin(), oh.end(), f.row(i));
  }
  return f;
}

namespace detail {

EdgeKernels::EdgeKernels(const ConvLayer& layer) : keys_(layer.kernels) {
  for (const auto& k : keys_) {
    cg_.push_back(&so3::clebsch_gordan_sparse(k.l_in, k.l_sh, k.l_out));
    buffers_.emplace_back(static_cast<std::size_t>((2 * k.l_in + 1) * (2 * k.l_out + 1)));
  }
}

void EdgeKernels::compute(std::span<const double> sh) {
  for (std::size_t k = 0; k < keys_.size(); ++k) {
    auto& buf = buffers_[k];
    std::fill(buf.begin(), buf.end(), 0.0);
    const int n3 = 2 * keys_[k].l_out + 1;
    const double* y = sh.data() + keys_[k].l_sh * keys_[k].l_sh;
    for (const auto& c : *cg_[k]) buf[static_cast<std::size_t>(c.m1 * n3 + c.m3)] += c.value * y[c.m2];
  }
}

void conv_forward(const ConvLayer& layer, std::span<const double> params, const StructureInput& input,
                  const ModelConfig& config, LayerTrace& trace) {
  const Graph& g = input.graph;
  const int nn = g.num_nodes();
  const int ne = g.num_edges();
  const int din = layer.in_spec.dim();
  const int dmid = layer.mid_spec.dim();
  const int nb = config.radial_basis_size;
  const int hw = config.radial_hidden_width;
  const int nw = layer.radial_outputs;
  const int nsh = (input.lmax_sh + 1) * (input.lmax_sh + 1);
  if (trace.input.size() != static_cast<std::size_t>(nn) * din)
    throw Error("convolution: input features do not match layer input spec " + layer.in_spec.str());

  // Radial network: silu(W1^T b / sqrt(nb)), then W2^T h / sqrt(hw).
  const double* w1 = params.data() + layer.w1_offset;
  const double* w2 = params.data() + layer.w2_offset;
  const double s1 = 1.0 / std::sqrt(static_cast<double>(nb));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hw));
  trace.radial_pre.assign(static_cast<std::size_t>(ne) * hw, 0.0);
  trace.radial_out.assign(static_cast<std::size_t>(ne) * nw, 0.0);
  std::vector<double> act(static_cast<std::size_t>(hw));
  for (int e = 0; e < ne; ++e) {
    const double* b = input.radial.data() + static_cast<std::size_t>(e) * nb;
    double* pre = trace.radial_pre.data() + static_cast<std::size_t>(e) * hw;
    for (int k = 0; k < nb; ++k) {
      const double bk = b[k] * s1;
      for (int h = 0; h < hw; ++h) pre[h] += bk * w1[k * hw + h];
    }
    double* out = trace.radial_out.data() + static_cast<std::size_t>(e) * nw;
    for (int h = 0; h < hw; ++h) {
      const double a = silu(pre[h]) * s2;
      const double* row = w2 + static_cast<std::size_t>(h) * nw;
      for (int q = 0; q < nw; ++q) out[q] += a * row[q];
    }
  }

  // Messages.
  const double inv_nn = 1.0 / std::sqrt(config.avg_num_neighbors);
  trace.mid.assign(static_cast<std::size_t>(nn) * dmid, 0.0);
  EdgeKernels kernels(layer);
  for (int e = 0; e < ne; ++e) {
    const Edge& edge = g.edges[static_cast<std::size_t>(e)];
    kernels.compute(std::span<const double>(input.sh.data() + static_cast<std::size_t>(e) * nsh, nsh));
    const double* w = trace.radial_out.data() + static_cast<std::size_t>(e) * nw;
    const double* xj = trace.input.data() + static_cast<std::size_t>(edge.source) * din;
    double* mi = trace.mid.data() + static_cast<std::size_t>(edge.target) * dmid;
    for (const auto& p : layer.paths) {
      const double* k = kernels.kernel(p.kernel);
      const int n1 = 2 * p.l_in + 1;
      const int n3 = p.out.dim();
      for (int u = 0; u < p.mul; ++u) {
        const double coef = w[p.weight_offset + u] * inv_nn;
        const double* x = xj + p.in_offset + u * n1;
        double* m = mi + p.mid_offset + u * n3;
        for (int a = 0; a < n1; ++a) {
          const double xa = coef * x[a];
          if (xa == 0.0) continue;
          const double* krow = k + a * n3;
          for (int c = 0; c < n3; ++c) m[c] += xa * krow[c];
        }
      }
    }
  }

  // Linear mix of the messages plus the per-species self-connection.
  trace.out_offsets.assign(static_cast<std::size_t>(nn) + 1, 0);
  for (int i = 0; i < nn; ++i)
    trace.out_offsets[static_cast<std::size_t>(i) + 1] =
        trace.out_offsets[static_cast<std::size_t>(i)] +
        layer.out_spec[static_cast<std::size_t>(species_index(g.species[static_cast<std::size_t>(i)]))].dim();
  trace.conv_out.assign(static_cast<std::size_t>(trace.out_offsets.back()), 0.0);
  for (int i = 0; i < nn; ++i) {
    const int s = species_index(g.species[static_cast<std::size_t>(i)]);
    const int group = layer.mix_groups == 1 ? 0 : s;
    double* out = trace.conv_out.data() + trace.out_offsets[static_cast<std::size_t>(i)];
    const auto apply = [&](const std::vector<LinearBlock>& blocks, const double* src) {
      for (const auto& b : blocks) {
        const double* wts = params.data() + b.weight_offset;
        for (int u = 0; u < b.src_mul; ++u) {
          const double* sv = src + b.src_offset + u * b.block_dim;
          for (int v = 0; v < b.dst_mul; ++v) {
            const double a = b.scale * wts[u * b.dst_mul + v];
            double* dv = out + b.dst_offset + v * b.block_dim;
            for (int m = 0; m < b.block_dim; ++m) dv[m] += a * sv[m];
          }
        }
      }
    };
    apply(layer.mix[static_cast<std::size_t>(group)], trace.mid.data() + static_cast<std::size_t>(i) * dmid);
    apply(layer.self[static_cast<std::size_t>(s)], trace.input.data() + static_cast<std::size_t>(i) * din);
  }
}

void gate_row(const GateLayout& layout, const double* in, double* out) {
  int pos = 0;
  for (const auto& c : layout.scalars) {
    const bool even = c.irrep.parity == Parity::even;
    for (int u = 0; u < c.mul; ++u, ++pos) out[pos] = even ? silu(in[pos]) : std::tanh(in[pos]);
  }
  const int nscalar = pos;
  const double* gates = in + nscalar;
  const int ngates = layout.gates.dim();
  const double* gated_in = gates + ngates;
  double* gated_out = out + nscalar;
  int copy = 0, offset = 0;
  for (const auto& c : layout.gated) {
    const int d = c.irrep.dim();
    for (int u = 0; u < c.mul; ++u, ++copy) {
      const double s = sigmoid(gates[copy]);
      for (int m = 0; m < d; ++m, ++offset) gated_out[offset] = s * gated_in[offset];
    }
  }
}

}  // namespace detail

DensityCoefficients Model::forward(const Geometry& geometry) const { return forward(prepare(geometry)); }

DensityCoefficients Model::forward(const StructureInput& input, ForwardTrace* trace) const {
  ForwardTrace local;
  ForwardTrace& t = trace ? *trace : local;
  t.layers.assign(layers_.size(), LayerTrace{});
  const Graph& g = input.graph;
  const int nn = g.num_nodes();
  t.layers[0].input = species_features(g).values;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const ConvLayer& layer = layers_[k];
    LayerTrace& lt = t.layers[k];
    detail::conv_forward(layer, params_, input, config_, lt);
    if (k + 1 < layers_.size()) {
      const int dpre = layer.gate.input_spec().dim();
      const int dpost = layer.gate.output_spec().dim();
      auto& next = t.layers[k + 1].input;
      next.assign(static_cast<std::size_t>(nn) * dpost, 0.0);
      for (int i = 0; i < nn; ++i)
        detail::gate_row(layer.gate, lt.conv_out.data() + static_cast<std::size_t>(i) * dpre,
                         next.data() + static_cast<std::size_t>(i) * dpost);
    }
  }
  const LayerTrace& last = t.layers.back();
  DensityCoefficients out;
  out.atoms.resize(static_cast<std::size_t>(nn));
  for (int i = 0; i < nn; ++i)
    out.atoms[static_cast<std::size_t>(i)].assign(last.conv_out.begin() + last.out_offsets[static_cast<std::size_t>(i)],
                                                  last.conv_out.begin() + last.out_offsets[static_cast<std::size_t>(i) + 1]);
  return out;
}

std::vector<FeatureTensor> Model::hidden_features(const StructureInput& input) const {
  ForwardTrace t;
  forward(input, &t);
  std::vector<FeatureTensor> out;
  for (std::size_t k = 0; k + 1 < layers_.size(); ++k)
    out.emplace_back(layers_[k].gate.output_spec(), input.graph.num_nodes(), t.layers[k + 1].input);
  return out;
}

FeatureTensor convolution(const ConvLayer& layer, std::span<const double> params, const FeatureTensor& features,
                          const StructureInput& input, const ModelConfig& config) {
  if (features.spec != layer.in_spec)
    throw Error("convolution: feature spec " + features.spec.str() + " does not match layer input " +
                layer.in_spec.str());
  if (layer.out_spec[0] != layer.out_spec[1])
    throw Error("convolution: species-dependent output layers are evaluated through Model::forward");
  LayerTrace t;
  t.input = features.values;
  detail::conv_forward(layer, params, input, config, t);
  return FeatureTensor(layer.out_spec[0], features.num_nodes, std::move(t.conv_out));
}

FeatureTensor gate(const FeatureTensor& features, const GateLayout& layout) {
  int copies = 0;
  for (const auto& c : layout.gated) copies += c.mul;
  for (const auto& c : layout.gates)
    if (c.irrep != Irrep(0, Parity::even)) throw Error("gate: gate channels must be 0e");
  if (layout.gates.dim() != copies)
    throw Error("gate: " + std::to_string(copies) + " gated copies need as many gate scalars, got " +
                std::to_string(layout.gates.dim()));
  for (const auto& c : layout.scalars)
    if (!c.irrep.is_scalar()) throw Error("gate: scalar section holds a non-scalar channel");
  for (const auto& c : layout.gated)
    if (c.irrep.is_scalar()) throw Error("gate: gated section holds a scalar channel");
  if (features.spec != layout.input_spec())
    throw Error("gate: feature spec " + features.spec.str() + " does not match gate layout " +
                layout.input_spec().str());
  FeatureTensor out(layout.output_spec(), features.num_nodes);
  for (int i = 0; i < features.num_nodes; ++i) detail::gate_row(layout, features.row(i), out.row(i));
  return out;
}

}  // namespace densnet::net
