#include <cmath>
#include <thread>

#include "conv_kernels.hpp"
#include "densnet/error.hpp"
#include "densnet/model.hpp"

namespace densnet::net {

namespace detail {

void gate_row_backward(const GateLayout& layout, const double* in, const double* d_out, double* d_in) {
  int pos = 0;
  for (const auto& c : layout.scalars) {
    const bool even = c.irrep.parity == Parity::even;
    for (int u = 0; u < c.mul; ++u, ++pos) {
      if (even) {
        d_in[pos] = d_out[pos] * silu_grad(in[pos]);
      } else {
        const double t = std::tanh(in[pos]);
        d_in[pos] = d_out[pos] * (1.0 - t * t);
      }
    }
  }
  const int nscalar = pos;
  const double* gates = in + nscalar;
  double* d_gates = d_in + nscalar;
  const int ngates = layout.gates.dim();
  const double* gated_in = gates + ngates;
  double* d_gated_in = d_gates + ngates;
  const double* d_gated_out = d_out + nscalar;
  int copy = 0, offset = 0;
  for (const auto& c : layout.gated) {
    const int d = c.irrep.dim();
    for (int u = 0; u < c.mul; ++u, ++copy) {
      const double s = sigmoid(gates[copy]);
      double dot = 0.0;
      for (int m = 0; m < d; ++m, ++offset) {
        d_gated_in[offset] = s * d_gated_out[offset];
        dot += gated_in[offset] * d_gated_out[offset];
      }
      d_gates[copy] = s * (1.0 - s) * dot;
    }
  }
}

void conv_backward(const ConvLayer& layer, std::span<const double> params, const StructureInput& input,
                   const ModelConfig& config, const LayerTrace& trace, std::span<const double> d_out,
                   std::span<double> grad, std::span<double> d_input) {
  const Graph& g = input.graph;
  const int nn = g.num_nodes();
  const int ne = g.num_edges();
  const int din = layer.in_spec.dim();
  const int dmid = layer.mid_spec.dim();
  const int nb = config.radial_basis_size;
  const int hw = config.radial_hidden_width;
  const int nw = layer.radial_outputs;
  const int nsh = (input.lmax_sh + 1) * (input.lmax_sh + 1);

  // Linear mix and self-connection.
  std::vector<double> d_mid(static_cast<std::size_t>(nn) * dmid, 0.0);
  for (int i = 0; i < nn; ++i) {
    const int s = species_index(g.species[static_cast<std::size_t>(i)]);
    const int group = layer.mix_groups == 1 ? 0 : s;
    const double* dout = d_out.data() + trace.out_offsets[static_cast<std::size_t>(i)];
    const auto back = [&](const std::vector<LinearBlock>& blocks, const double* src, double* d_src) {
      for (const auto& b : blocks) {
        const double* wts = params.data() + b.weight_offset;
        double* gw = grad.data() + b.weight_offset;
        for (int u = 0; u < b.src_mul; ++u) {
          const double* sv = src + b.src_offset + u * b.block_dim;
          double* dsv = d_src + b.src_offset + u * b.block_dim;
          for (int v = 0; v < b.dst_mul; ++v) {
            const double* dv = dout + b.dst_offset + v * b.block_dim;
            double dot = 0.0;
            const double a = b.scale * wts[u * b.dst_mul + v];
            for (int m = 0; m < b.block_dim; ++m) {
              dot += sv[m] * dv[m];
              dsv[m] += a * dv[m];
            }
            gw[u * b.dst_mul + v] += b.scale * dot;
          }
        }
      }
    };
    back(layer.mix[static_cast<std::size_t>(group)], trace.mid.data() + static_cast<std::size_t>(i) * dmid,
         d_mid.data() + static_cast<std::size_t>(i) * dmid);
    back(layer.self[static_cast<std::size_t>(s)], trace.input.data() + static_cast<std::size_t>(i) * din,
         d_input.data() + static_cast<std::size_t>(i) * din);
  }

  // Messages.
  const double inv_nn = 1.0 / std::sqrt(config.avg_num_neighbors);
  std::vector<double> d_radial(static_cast<std::size_t>(ne) * nw, 0.0);
  std::vector<double> t;
  EdgeKernels kernels(layer);
  for (int e = 0; e < ne; ++e) {
    const Edge& edge = g.edges[static_cast<std::size_t>(e)];
    kernels.compute(std::span<const double>(input.sh.data() + static_cast<std::size_t>(e) * nsh, nsh));
    const double* w = trace.radial_out.data() + static_cast<std::size_t>(e) * nw;
    double* dw = d_radial.data() + static_cast<std::size_t>(e) * nw;
    const double* xj = trace.input.data() + static_cast<std::size_t>(edge.source) * din;
    double* dxj = d_input.data() + static_cast<std::size_t>(edge.source) * din;
    const double* dmi = d_mid.data() + static_cast<std::size_t>(edge.target) * dmid;
    for (const auto& p : layer.paths) {
      const double* k = kernels.kernel(p.kernel);
      const int n1 = 2 * p.l_in + 1;
      const int n3 = p.out.dim();
      t.resize(static_cast<std::size_t>(n3));
      for (int u = 0; u < p.mul; ++u) {
        const double* x = xj + p.in_offset + u * n1;
        double* dx = dxj + p.in_offset + u * n1;
        const double* gm = dmi + p.mid_offset + u * n3;
        std::fill(t.begin(), t.end(), 0.0);
        const double coef = w[p.weight_offset + u] * inv_nn;
        for (int a = 0; a < n1; ++a) {
          const double* krow = k + a * n3;
          double acc = 0.0;
          for (int c = 0; c < n3; ++c) {
            t[static_cast<std::size_t>(c)] += x[a] * krow[c];
            acc += krow[c] * gm[c];
          }
          dx[a] += coef * acc;
        }
        double dot = 0.0;
        for (int c = 0; c < n3; ++c) dot += gm[c] * t[static_cast<std::size_t>(c)];
        dw[p.weight_offset + u] += inv_nn * dot;
      }
    }
  }

  // Radial network.
  const double* w2 = params.data() + layer.w2_offset;
  double* g1 = grad.data() + layer.w1_offset;
  double* g2 = grad.data() + layer.w2_offset;
  const double s1 = 1.0 / std::sqrt(static_cast<double>(nb));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hw));
  std::vector<double> d_pre(static_cast<std::size_t>(hw));
  for (int e = 0; e < ne; ++e) {
    const double* pre = trace.radial_pre.data() + static_cast<std::size_t>(e) * hw;
    const double* dw = d_radial.data() + static_cast<std::size_t>(e) * nw;
    for (int h = 0; h < hw; ++h) {
      const double a = silu(pre[h]) * s2;
      const double* row = w2 + static_cast<std::size_t>(h) * nw;
      double* grow = g2 + static_cast<std::size_t>(h) * nw;
      double dact = 0.0;
      for (int q = 0; q < nw; ++q) {
        grow[q] += a * dw[q];
        dact += row[q] * dw[q];
      }
      d_pre[static_cast<std::size_t>(h)] = dact * s2 * silu_grad(pre[h]);
    }
    const double* b = input.radial.data() + static_cast<std::size_t>(e) * nb;
    for (int k = 0; k < nb; ++k) {
      const double bk = b[k] * s1;
      for (int h = 0; h < hw; ++h) g1[k * hw + h] += bk * d_pre[static_cast<std::size_t>(h)];
    }
  }
}

}  // namespace detail

double loss_mse(const DensityCoefficients& pred, const DensityCoefficients& target) {
  if (pred.atoms.size() != target.atoms.size()) throw Error("loss_mse: atom count mismatch");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t a = 0; a < pred.atoms.size(); ++a) {
    if (pred.atoms[a].size() != target.atoms[a].size())
      throw Error("loss_mse: coefficient layout mismatch at atom " + std::to_string(a));
    for (std::size_t k = 0; k < pred.atoms[a].size(); ++k) {
      const double d = pred.atoms[a][k] - target.atoms[a][k];
      sum += d * d;
    }
    n += pred.atoms[a].size();
  }
  if (n == 0) throw Error("loss_mse: no coefficients");
  return sum / static_cast<double>(n);
}

namespace {

// Sum of squared residuals of one structure and its parameter gradient,
// with the residual scaled by 2 / total_count.
double sample_gradient(const Model& model, const Sample& sample, double total_count, std::vector<double>& grad) {
  const auto& layers = model.layers();
  const auto& config = model.config();
  const auto params = model.params();
  const StructureInput& input = *sample.input;
  const int nn = input.graph.num_nodes();
  ForwardTrace trace;
  const DensityCoefficients pred = model.forward(input, &trace);
  const DensityCoefficients& target = *sample.target;
  if (pred.atoms.size() != target.atoms.size()) throw Error("gradient: target atom count mismatch");

  double sumsq = 0.0;
  std::vector<double> d_out(trace.layers.back().conv_out.size());
  std::size_t pos = 0;
  for (std::size_t a = 0; a < pred.atoms.size(); ++a) {
    if (pred.atoms[a].size() != target.atoms[a].size())
      throw Error("gradient: target layout mismatch at atom " + std::to_string(a));
    for (std::size_t k = 0; k < pred.atoms[a].size(); ++k, ++pos) {
      const double r = pred.atoms[a][k] - target.atoms[a][k];
      sumsq += r * r;
      d_out[pos] = 2.0 * r / total_count;
    }
  }

  grad.assign(params.size(), 0.0);
  std::vector<double> d_in;
  for (std::size_t k = layers.size(); k-- > 0;) {
    const LayerTrace& lt = trace.layers[k];
    d_in.assign(lt.input.size(), 0.0);
    detail::conv_backward(layers[k], params, input, config, lt, d_out, grad, d_in);
    if (k == 0) break;
    const ConvLayer& prev = layers[k - 1];
    const LayerTrace& pt = trace.layers[k - 1];
    const int dpre = prev.gate.input_spec().dim();
    const int dpost = prev.gate.output_spec().dim();
    d_out.assign(pt.conv_out.size(), 0.0);
    for (int i = 0; i < nn; ++i)
      detail::gate_row_backward(prev.gate, pt.conv_out.data() + static_cast<std::size_t>(i) * dpre,
                                d_in.data() + static_cast<std::size_t>(i) * dpost,
                                d_out.data() + static_cast<std::size_t>(i) * dpre);
  }
  return sumsq;
}

}  // namespace

GradientResult gradient(const Model& model, std::span<const Sample> batch, int workers) {
  if (batch.empty()) throw Error("gradient: empty batch");
  std::size_t total = 0;
  for (const auto& s : batch) total += s.target->num_values();
  if (total == 0) throw Error("gradient: batch has no coefficients");
  const double count = static_cast<double>(total);

  GradientResult result;
  result.grad.assign(model.param_count(), 0.0);
  const std::size_t n = batch.size();
  std::vector<double> sumsq(n, 0.0);

  if (workers <= 1 || n == 1) {
    std::vector<double> g;
    for (std::size_t b = 0; b < n; ++b) {
      sumsq[b] = sample_gradient(model, batch[b], count, g);
      for (std::size_t p = 0; p < g.size(); ++p) result.grad[p] += g[p];
    }
  } else {
    std::vector<std::vector<double>> grads(n);
    std::vector<std::exception_ptr> errors(n);
    {
      std::vector<std::jthread> pool;
      const std::size_t nworkers = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
      for (std::size_t w = 0; w < nworkers; ++w) {
        pool.emplace_back([&, w] {
          for (std::size_t b = w; b < n; b += nworkers) {
            try {
              sumsq[b] = sample_gradient(model, batch[b], count, grads[b]);
            } catch (...) {
              errors[b] = std::current_exception();
            }
          }
        });
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t p = 0; p < grads[b].size(); ++p) result.grad[p] += grads[b][p];
  }
  double total_sq = 0.0;
  for (double s : sumsq) total_sq += s;
  result.loss = total_sq / count;
  return result;
}

}  // namespace densnet::net
