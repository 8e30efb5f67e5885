#include "densnet/experiment_config.hpp"

#include <functional>
#include <map>

#include "densnet/error.hpp"
#include "densnet/text_io.hpp"

namespace densnet::exp {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

int to_int(const std::string& v) {
  const auto x = parse_integer(v);
  if (x < -(1LL << 31) || x > (1LL << 31) - 1) throw Error("integer out of range: " + v);
  return static_cast<int>(x);
}

std::vector<int> to_int_list(const std::string& v) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const auto comma = v.find(',', start);
    const auto item = trim(std::string_view(v).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (item.empty()) throw Error("empty list item in '" + v + "'");
    out.push_back(to_int(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string join(const std::vector<int>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"experiment", [](auto& c, const auto& v) { c.experiment = to_int(v); }},
      {"n_train", [](auto& c, const auto& v) { c.n_train = to_int(v); }},
      {"n_test", [](auto& c, const auto& v) { c.n_test = to_int(v); }},
      {"n_molecules", [](auto& c, const auto& v) { c.n_molecules = to_int(v); }},
      {"basis_file", [](auto& c, const auto& v) { c.basis_file = v; }},
      {"dataset_file", [](auto& c, const auto& v) { c.dataset_file = v; }},
      {"teacher_l_h", [](auto& c, const auto& v) { c.teacher.l_h = to_int(v); }},
      {"teacher_n_s", [](auto& c, const auto& v) { c.teacher.base_scalar_mult = to_int(v); }},
      {"teacher_layers", [](auto& c, const auto& v) { c.teacher.num_layers = to_int(v); }},
      {"teacher_std0", [](auto& c, const auto& v) { c.teacher.std0 = parse_double(v); }},
      {"teacher_decay", [](auto& c, const auto& v) { c.teacher.decay = parse_double(v); }},
      {"teacher_bias", [](auto& c, const auto& v) { c.teacher.bias = parse_double(v); }},
      {"l_h", [](auto& c, const auto& v) { c.l_h = to_int_list(v); }},
      {"n_s", [](auto& c, const auto& v) { c.n_s = to_int(v); }},
      {"num_layers", [](auto& c, const auto& v) { c.num_layers = to_int(v); }},
      {"cutoff", [](auto& c, const auto& v) { c.cutoff = parse_double(v); }},
      {"minimal_hidden", [](auto& c, const auto& v) { c.minimal_hidden = IrrepsSpec::parse(v).str(); }},
      {"lmax_o", [](auto& c, const auto& v) { c.lmax_o = to_int_list(v); }},
      {"epochs", [](auto& c, const auto& v) { c.epochs = to_int(v); }},
      {"learning_rate", [](auto& c, const auto& v) { c.learning_rate = parse_double(v); }},
      {"final_lr_fraction", [](auto& c, const auto& v) { c.final_lr_fraction = parse_double(v); }},
      {"batch_size", [](auto& c, const auto& v) { c.batch_size = to_int(v); }},
      {"workers", [](auto& c, const auto& v) { c.workers = to_int(v); }},
      {"probe_structures", [](auto& c, const auto& v) { c.probe_structures = to_int(v); }},
      {"grid_spacing", [](auto& c, const auto& v) { c.grid_spacing = parse_double(v); }},
      {"grid_padding", [](auto& c, const auto& v) { c.grid_padding = parse_double(v); }},
      {"plateau_tolerance", [](auto& c, const auto& v) { c.plateau_tolerance = parse_double(v); }},
      {"seed", [](auto& c, const auto& v) {
         const auto x = parse_integer(v);
         if (x < 0) throw Error("seed must be non-negative");
         c.seed = static_cast<std::uint64_t>(x);
       }},
      {"out_dir", [](auto& c, const auto& v) { c.out_dir = v; }},
  };
  return table;
}

}  // namespace

void ExperimentConfig::validate() const {
  const auto need = [](bool ok, const std::string& what) {
    if (!ok) throw Error("config: " + what);
  };
  need(experiment >= 1 && experiment <= 3, "experiment must be 1, 2 or 3");
  need(n_train >= 1, "n_train must be >= 1");
  need(n_test >= 1, "n_test must be >= 1");
  need(n_molecules >= 1, "n_molecules must be >= 1");
  need(!l_h.empty(), "l_h list is empty");
  for (int l : l_h) need(l >= 0 && l <= 4, "l_h entries must be in 0..4");
  need(!lmax_o.empty(), "lmax_o list is empty");
  for (int l : lmax_o) need(l >= 0 && l <= 4, "lmax_o entries must be in 0..4");
  need(n_s >= 1, "n_s must be >= 1");
  need(num_layers >= 1, "num_layers must be >= 1");
  need(cutoff > 0.0, "cutoff must be positive");
  need(epochs >= 1, "epochs must be >= 1");
  need(learning_rate > 0.0, "learning_rate must be positive");
  need(final_lr_fraction > 0.0 && final_lr_fraction <= 1.0, "final_lr_fraction must be in (0, 1]");
  need(batch_size >= 1, "batch_size must be >= 1");
  need(workers >= 1, "workers must be >= 1");
  need(probe_structures >= 1, "probe_structures must be >= 1");
  need(grid_spacing > 0.0, "grid_spacing must be positive");
  need(grid_padding >= 0.0, "grid_padding must be non-negative");
  need(plateau_tolerance >= 0.0, "plateau_tolerance must be non-negative");
  need(teacher.decay > 0.0 && teacher.std0 > 0.0, "teacher scales must be positive");
  need(!out_dir.empty(), "out_dir is empty");
}

void set_option(ExperimentConfig& config, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw Error("config: unknown key '" + key + "'");
  try {
    it->second(config, value);
  } catch (const Error& e) {
    throw Error("config: " + key + ": " + e.what());
  }
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  for (const auto& [number, line] : content_lines(text)) {
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error("config line " + std::to_string(number) + ": expected key = value");
    try {
      set_option(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error("config line " + std::to_string(number) + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

std::string format_config(const ExperimentConfig& c) {
  std::string s;
  const auto put = [&](const std::string& k, const std::string& v) { s += k + " = " + v + "\n"; };
  put("experiment", std::to_string(c.experiment));
  put("n_train", std::to_string(c.n_train));
  put("n_test", std::to_string(c.n_test));
  put("n_molecules", std::to_string(c.n_molecules));
  if (!c.basis_file.empty()) put("basis_file", c.basis_file);
  if (!c.dataset_file.empty()) put("dataset_file", c.dataset_file);
  put("teacher_l_h", std::to_string(c.teacher.l_h));
  put("teacher_n_s", std::to_string(c.teacher.base_scalar_mult));
  put("teacher_layers", std::to_string(c.teacher.num_layers));
  put("teacher_std0", format_double(c.teacher.std0));
  put("teacher_decay", format_double(c.teacher.decay));
  put("teacher_bias", format_double(c.teacher.bias));
  put("l_h", join(c.l_h));
  put("n_s", std::to_string(c.n_s));
  put("num_layers", std::to_string(c.num_layers));
  put("cutoff", format_double(c.cutoff));
  put("minimal_hidden", c.minimal_hidden);
  put("lmax_o", join(c.lmax_o));
  put("epochs", std::to_string(c.epochs));
  put("learning_rate", format_double(c.learning_rate));
  put("final_lr_fraction", format_double(c.final_lr_fraction));
  put("batch_size", std::to_string(c.batch_size));
  put("workers", std::to_string(c.workers));
  put("probe_structures", std::to_string(c.probe_structures));
  put("grid_spacing", format_double(c.grid_spacing));
  put("grid_padding", format_double(c.grid_padding));
  put("plateau_tolerance", format_double(c.plateau_tolerance));
  put("seed", std::to_string(c.seed));
  put("out_dir", c.out_dir);
  return s;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_text_file(path)); }

}  // namespace densnet::exp
