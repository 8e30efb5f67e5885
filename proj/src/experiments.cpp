#include "densnet/experiments.hpp"

#include <cmath>
#include <filesystem>
#include <json.hpp>

#include "densnet/checkpoint.hpp"
#include "densnet/error.hpp"
#include "densnet/text_io.hpp"

namespace densnet::exp {

namespace fs = std::filesystem;

data::Dataset standard_dataset(const ExperimentConfig& c) {
  c.validate();
  if (!c.dataset_file.empty()) return data::load_dataset(c.dataset_file);
  const auto basis = c.basis_file.empty() ? density::synthetic_basis() : density::load_basis(c.basis_file);
  const auto geoms = data::generate_clusters(c.n_train + c.n_test, c.n_molecules, c.data_seed());
  auto ds = data::teacher_targets(geoms, basis, c.teacher_seed(), c.teacher);
  ds.provenance.insert(ds.provenance.begin(), "clusters n=" + std::to_string(c.n_train + c.n_test) +
                                                  " molecules=" + std::to_string(c.n_molecules) +
                                                  " seed=" + std::to_string(c.data_seed()));
  return ds;
}

Split split_dataset(const data::Dataset& ds, const ExperimentConfig& c) {
  if (ds.size() < 2) throw Error("split_dataset: need at least two structures");
  const double total = static_cast<double>(c.n_train + c.n_test);
  auto [train, test] = data::split(ds, static_cast<double>(c.n_train) / total, c.split_seed());
  if (train.size() == 0 || test.size() == 0) throw Error("split_dataset: empty train or test part");
  return {std::move(train), std::move(test)};
}

net::ModelConfig model_config(const ExperimentConfig& c, const IrrepsSpec& hidden, const density::AuxiliaryBasis& basis) {
  net::ModelConfig m;
  m.num_layers = c.num_layers;
  m.hidden_spec = hidden;
  for (int s = 0; s < kNumSpecies; ++s) m.output_spec[static_cast<std::size_t>(s)] = basis.spec(static_cast<Species>(s));
  m.cutoff = c.cutoff;
  m.seed = c.model_seed();
  return m;
}

TrainSettings train_settings(const ExperimentConfig& c) {
  TrainSettings t;
  t.epochs = c.epochs;
  t.learning_rate = c.learning_rate;
  t.final_lr_fraction = c.final_lr_fraction;
  t.batch_size = c.batch_size;
  t.shuffle_seed = c.shuffle_seed();
  t.workers = c.workers;
  t.probe_structures = c.probe_structures;
  t.grid_spacing = c.grid_spacing;
  t.grid_padding = c.grid_padding;
  return t;
}

std::size_t detect_plateau(std::span<const double> ys, double rel_tol) {
  if (ys.empty()) throw Error("detect_plateau: empty series");
  for (std::size_t i = 0; i < ys.size(); ++i) {
    bool flat = true;
    for (std::size_t j = i + 1; j < ys.size() && flat; ++j) flat = ys[j] >= ys[i] * (1.0 - rel_tol);
    if (flat) return i;
  }
  return ys.size() - 1;
}

std::string channel_label(int l) {
  static const char* letters = "spdfghik";
  if (l < 0 || l > 7) throw Error("channel_label: l out of range");
  return std::string(1, letters[l]);
}

namespace {

std::vector<int> basis_ls(const density::AuxiliaryBasis& b) { return b.ls(); }

nlohmann::json run_json(const RunRecord& r) {
  nlohmann::json j;
  j["label"] = r.label;
  j["hidden"] = r.model.hidden_spec.str();
  j["param_count"] = r.param_count;
  j["wall_seconds"] = r.wall_seconds;
  j["final_loss"] = r.epoch_loss.back();
  j["eps_total"] = r.final_eval.eps_total;
  for (const auto& [l, v] : r.final_eval.eps_l) j["eps_l"][std::to_string(l)] = v;
  return j;
}

nlohmann::json advisories_json(const std::vector<Advisory>& as) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& a : as) j.push_back({{"name", a.name}, {"pass", a.pass}, {"detail", a.detail}});
  return j;
}

void write_json(const nlohmann::json& j, const fs::path& path) { write_text_file(path.string(), j.dump(2) + "\n"); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

Experiment1Result experiment1(const ExperimentConfig& c) {
  const auto ds = standard_dataset(c);
  const auto parts = split_dataset(ds, c);
  const auto ls = basis_ls(ds.basis);

  std::vector<std::string> cols = {"l_h", "hidden", "param_count", "final_loss", "eps_total"};
  for (int l : ls) cols.push_back("eps_" + std::to_string(l));
  Experiment1Result r{Table(cols), {}, {}, parts.test};
  for (int lh : c.l_h) {
    const auto mc = model_config(c, hidden_config(lh, c.n_s), ds.basis);
    auto run = train(mc, parts.train, parts.test, train_settings(c), "l_h=" + std::to_string(lh));
    std::vector<Cell> row = {lh, mc.hidden_spec.str(), run.param_count, run.epoch_loss.back(),
                             run.final_eval.eps_total};
    for (int l : ls) row.emplace_back(run.final_eval.eps_l.at(l));
    r.table.add_row(row);
    r.runs.push_back(std::move(run));
  }

  const auto find = [&](int lh) -> const RunRecord* {
    for (std::size_t i = 0; i < c.l_h.size(); ++i)
      if (c.l_h[i] == lh) return &r.runs[i];
    return nullptr;
  };
  const RunRecord* r0 = find(0);
  const RunRecord* r1 = find(1);
  if (r0 && r1) {
    r.advisories.push_back({"eps_total non-increasing from l_h=0 to l_h=1",
                            r1->final_eval.eps_total <= r0->final_eval.eps_total,
                            fmt(r0->final_eval.eps_total) + " -> " + fmt(r1->final_eval.eps_total)});
  }
  if (r0 && r.runs.size() > 1) {
    const RunRecord& best = r.runs.back();
    bool all = true;
    std::string detail;
    for (int l : ls) {
      const double a = r0->final_eval.eps_l.at(l), b = best.final_eval.eps_l.at(l);
      all = all && b < a;
      detail += "eps_" + std::to_string(l) + " " + fmt(a) + "->" + fmt(b) + " ";
    }
    detail.pop_back();
    r.advisories.push_back({"every eps_l improves from l_h=0 to " + best.label, all, detail});
  }
  return r;
}

Experiment2Result experiment2(const ExperimentConfig& c) {
  const auto ds = standard_dataset(c);
  Experiment2Result r{Table({"lmax_o", "l_h", "output_O", "param_count", "final_loss", "eps_total"}),
                      Table({"lmax_o", "plateau_l_h", "plateau_eps_total"}),
                      {}};
  for (int lmax : c.lmax_o) {
    const auto truncated = data::truncate_dataset(ds, lmax);
    const auto parts = split_dataset(truncated, c);
    std::vector<double> eps;
    for (int lh : c.l_h) {
      const auto mc = model_config(c, hidden_config(lh, c.n_s), truncated.basis);
      auto run = train(mc, parts.train, parts.test, train_settings(c),
                       "lmax_o=" + std::to_string(lmax) + " l_h=" + std::to_string(lh));
      r.table.add_row({lmax, lh, truncated.basis.spec(Species::O).str(), run.param_count, run.epoch_loss.back(),
                       run.final_eval.eps_total});
      eps.push_back(run.final_eval.eps_total);
      r.runs.push_back(std::move(run));
    }
    const auto k = detect_plateau(eps, c.plateau_tolerance);
    r.plateau.add_row({lmax, c.l_h[k], eps[k]});
  }
  return r;
}

Experiment3Result experiment3(const ExperimentConfig& c, const data::Dataset* standard) {
  const auto ds = standard ? *standard : standard_dataset(c);
  const auto scaled = data::scale_dataset(ds);
  const auto hidden = IrrepsSpec::parse(c.minimal_hidden);
  Experiment3Result r{Table({"dataset", "epoch", "layer", "l", "channel", "norm"}), {}, {}};
  const std::pair<const char*, const data::Dataset*> sets[] = {{"standard", &ds}, {"scaled", &scaled}};
  for (const auto& [name, set] : sets) {
    const auto parts = split_dataset(*set, c);
    auto run = train(model_config(c, hidden, set->basis), parts.train, parts.test, train_settings(c), name);
    for (std::size_t e = 0; e < run.norms.size(); ++e)
      for (std::size_t k = 0; k < run.norms[e].size(); ++k)
        for (const auto& [l, v] : run.norms[e][k]) r.norms.add_row({name, e + 1, k + 1, l, channel_label(l), v});
    r.runs.push_back(std::move(run));
  }

  // Scalar-dominant hierarchy at the end of training on standard data.
  const auto& last = r.runs.front().norms.back();
  bool ordered = true;
  std::string detail;
  for (std::size_t k = 0; k < last.size(); ++k) {
    double prev = INFINITY;
    detail += "layer " + std::to_string(k + 1) + ":";
    for (const auto& [l, v] : last[k]) {
      ordered = ordered && v < prev;
      prev = v;
      detail += " " + channel_label(l) + "=" + fmt(v);
    }
    detail += k + 1 < last.size() ? "; " : "";
  }
  r.advisories.push_back({"standard data: final norms decrease with l in every layer", ordered, detail});
  return r;
}

void write_outputs(const Experiment1Result& r, const ExperimentConfig& c) {
  const fs::path out(c.out_dir);
  fs::create_directories(out / "checkpoints");
  emit_csv(r.table, (out / "exp1.csv").string());

  Table losses({"l_h", "epoch", "loss"});
  nlohmann::json summary;
  summary["experiment"] = 1;
  summary["config"] = format_config(c);
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    const auto& run = r.runs[i];
    for (std::size_t e = 0; e < run.epoch_loss.size(); ++e) losses.add_row({c.l_h[i], e + 1, run.epoch_loss[e]});
    net::save_checkpoint(net::Model(run.model, run.params),
                         (out / "checkpoints" / ("exp1_lh" + std::to_string(c.l_h[i]) + ".ckpt")).string());
    summary["runs"].push_back(run_json(run));
  }
  emit_csv(losses, (out / "exp1_loss.csv").string());
  summary["advisories"] = advisories_json(r.advisories);
  write_json(summary, out / "exp1_summary.json");

  data::save_dataset(r.test_set, (out / "test.dataset").string());

  std::vector<Series> series;
  std::vector<double> xs(c.l_h.begin(), c.l_h.end());
  Series total{"total", xs, {}, true};
  for (const auto& run : r.runs) total.y.push_back(run.final_eval.eps_total);
  series.push_back(total);
  for (const auto& [l, v] : r.runs.front().final_eval.eps_l) {
    Series s{"l=" + std::to_string(l), xs, {}};
    for (const auto& run : r.runs) s.y.push_back(run.final_eval.eps_l.at(l));
    series.push_back(std::move(s));
  }
  emit_svg_plot(series, {"Density error by output channel", "hidden l_h", "error (%)", true},
                (out / "exp1_eps.svg").string());
}

void write_outputs(const Experiment2Result& r, const ExperimentConfig& c) {
  const fs::path out(c.out_dir);
  fs::create_directories(out);
  emit_csv(r.table, (out / "exp2.csv").string());
  emit_csv(r.plateau, (out / "exp2_plateau.csv").string());
  nlohmann::json summary;
  summary["experiment"] = 2;
  summary["config"] = format_config(c);
  for (const auto& run : r.runs) summary["runs"].push_back(run_json(run));
  write_json(summary, out / "exp2_summary.json");

  std::vector<Series> series;
  std::vector<double> xs(c.l_h.begin(), c.l_h.end());
  std::size_t i = 0;
  for (int lmax : c.lmax_o) {
    Series s{"lmax_o=" + std::to_string(lmax), xs, {}};
    for (std::size_t k = 0; k < c.l_h.size(); ++k) s.y.push_back(r.runs[i++].final_eval.eps_total);
    series.push_back(std::move(s));
  }
  emit_svg_plot(series, {"Density error on truncated datasets", "hidden l_h", "total error (%)", true},
                (out / "exp2_eps.svg").string());
}

void write_outputs(const Experiment3Result& r, const ExperimentConfig& c) {
  const fs::path out(c.out_dir);
  fs::create_directories(out);
  emit_csv(r.norms, (out / "exp3_norms.csv").string());
  nlohmann::json summary;
  summary["experiment"] = 3;
  summary["config"] = format_config(c);
  for (const auto& run : r.runs) summary["runs"].push_back(run_json(run));
  summary["advisories"] = advisories_json(r.advisories);
  write_json(summary, out / "exp3_summary.json");

  for (const auto& run : r.runs) {
    std::vector<Series> series;
    const std::size_t layers = run.norms.front().size();
    for (std::size_t k = 0; k < layers; ++k)
      for (const auto& [l, v0] : run.norms.front()[k]) {
        Series s{"layer " + std::to_string(k + 1) + " " + channel_label(l), {}, {}, k % 2 == 1};
        for (std::size_t e = 0; e < run.norms.size(); ++e) {
          s.x.push_back(static_cast<double>(e + 1));
          s.y.push_back(std::max(run.norms[e][k].at(l), 1e-300));
        }
        series.push_back(std::move(s));
      }
    emit_svg_plot(series, {"Feature norms, " + run.label + " data", "epoch", "norm / (2l+1)", true},
                  (out / ("exp3_" + run.label + ".svg")).string());
  }
}

}  // namespace densnet::exp
