#include "densnet/checkpoint.hpp"

#include <map>

#include "densnet/error.hpp"
#include "densnet/text_io.hpp"

namespace densnet::net {

std::string format_checkpoint(const Model& model) {
  const ModelConfig& c = model.config();
  std::string s = "densnet-checkpoint 1\n";
  s += "num_layers " + std::to_string(c.num_layers) + "\n";
  s += "hidden_spec " + c.hidden_spec.str() + "\n";
  s += "output_spec_H " + c.output_spec[0].str() + "\n";
  s += "output_spec_O " + c.output_spec[1].str() + "\n";
  s += "lmax_sh " + std::to_string(c.lmax_sh) + "\n";
  s += "cutoff " + format_double(c.cutoff) + "\n";
  s += "radial_basis_size " + std::to_string(c.radial_basis_size) + "\n";
  s += "radial_hidden_width " + std::to_string(c.radial_hidden_width) + "\n";
  s += "avg_num_neighbors " + format_double(c.avg_num_neighbors) + "\n";
  s += "self_connection " + std::string(c.self_connection ? "1" : "0") + "\n";
  s += "seed " + std::to_string(c.seed) + "\n";
  s += "params " + std::to_string(model.param_count()) + "\n";
  for (double p : model.params()) s += format_double(p) + "\n";
  s += "end\n";
  return s;
}

Model parse_checkpoint(const std::string& text) {
  const auto lines = content_lines(text);
  std::size_t i = 0;
  const auto next = [&]() -> std::vector<std::string_view> {
    if (i >= lines.size()) throw Error("checkpoint: unexpected end of file");
    return split_tokens(lines[i++].second);
  };
  auto header = next();
  if (header.size() != 2 || header[0] != "densnet-checkpoint") throw Error("checkpoint: missing header");
  if (header[1] != "1") throw Error("checkpoint: unsupported version " + std::string(header[1]));

  std::map<std::string, std::string, std::less<>> kv;
  std::size_t count = 0;
  while (true) {
    auto tok = next();
    if (tok.size() != 2) throw Error("checkpoint: malformed line " + std::to_string(lines[i - 1].first));
    if (tok[0] == "params") {
      count = static_cast<std::size_t>(parse_integer(tok[1]));
      break;
    }
    kv[std::string(tok[0])] = std::string(tok[1]);
  }
  const auto get = [&](std::string_view key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error("checkpoint: missing key '" + std::string(key) + "'");
    return it->second;
  };

  ModelConfig c;
  c.num_layers = static_cast<int>(parse_integer(get("num_layers")));
  c.hidden_spec = IrrepsSpec::parse(get("hidden_spec"));
  c.output_spec[0] = IrrepsSpec::parse(get("output_spec_H"));
  c.output_spec[1] = IrrepsSpec::parse(get("output_spec_O"));
  c.lmax_sh = static_cast<int>(parse_integer(get("lmax_sh")));
  c.cutoff = parse_double(get("cutoff"));
  c.radial_basis_size = static_cast<int>(parse_integer(get("radial_basis_size")));
  c.radial_hidden_width = static_cast<int>(parse_integer(get("radial_hidden_width")));
  c.avg_num_neighbors = parse_double(get("avg_num_neighbors"));
  c.self_connection = parse_integer(get("self_connection")) != 0;
  c.seed = static_cast<std::uint64_t>(std::stoull(get("seed")));

  std::vector<double> params;
  params.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    auto tok = next();
    if (tok.size() != 1) throw Error("checkpoint: malformed parameter line " + std::to_string(lines[i - 1].first));
    params.push_back(parse_double(tok[0]));
  }
  auto tail = next();
  if (tail.size() != 1 || tail[0] != "end") throw Error("checkpoint: missing 'end' after parameters");
  return Model(std::move(c), std::move(params));
}

void save_checkpoint(const Model& model, const std::string& path) { write_text_file(path, format_checkpoint(model)); }

Model load_checkpoint(const std::string& path) { return parse_checkpoint(read_text_file(path)); }

}  // namespace densnet::net
