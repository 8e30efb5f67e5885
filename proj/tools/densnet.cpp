// densnet command-line driver.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <json.hpp>

#include "densnet/checkpoint.hpp"
#include "densnet/error.hpp"
#include "densnet/experiments.hpp"
#include "densnet/text_io.hpp"

namespace fs = std::filesystem;
using namespace densnet;

namespace {

struct Common {
  std::string config_file;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_file, "key = value configuration file")->check(CLI::ExistingFile);
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&c](std::uint64_t s) { c.seed = s, c.seed_set = true; }, "master seed");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--set", c.overrides, "override one config key, key=value (repeatable)");
}

exp::ExperimentConfig resolve(const Common& c) {
  exp::ExperimentConfig cfg = c.config_file.empty() ? exp::ExperimentConfig{} : exp::load_config(c.config_file);
  if (c.seed_set) cfg.seed = c.seed;
  if (!c.out.empty()) cfg.out_dir = c.out;
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error("--set expects key=value, got '" + kv + "'");
    exp::set_option(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

void print_advisories(const std::vector<exp::Advisory>& as) {
  for (const auto& a : as) std::printf("[advisory %s] %s: %s\n", a.pass ? "PASS" : "FAIL", a.name.c_str(), a.detail.c_str());
}

void print_eval(const exp::EvalResult& e) {
  std::printf("eps_total %.6g\n", e.eps_total);
  for (const auto& [l, v] : e.eps_l) std::printf("eps_%d %.6g\n", l, v);
  std::printf("coefficient mse %.6g\n", e.loss);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equivariant density-coefficient networks: data, training and experiments"};
  app.require_subcommand(1);

  Common gen_c, train_c, e1_c, e2_c, e3_c;
  int truncate = -1;
  bool scale = false, gzip = false;
  auto* gen = app.add_subcommand("gen-data", "generate a teacher-labeled water-cluster dataset");
  add_common(gen, gen_c);
  gen->add_option("--truncate", truncate, "drop shells above this l")->check(CLI::Range(0, 8));
  gen->add_flag("--scale", scale, "rescale every l>0 channel to the l=0 spread");
  gen->add_flag("--gzip", gzip, "write dataset.gz instead of plain text");

  int train_lh = 1;
  std::string hidden, dataset_file;
  auto* tr = app.add_subcommand("train", "train one model and write its checkpoint");
  add_common(tr, train_c);
  tr->add_option("--l-h", train_lh, "hidden l_h for hidden_config(l_h, n_s)")->check(CLI::Range(0, 4));
  tr->add_option("--hidden", hidden, "explicit hidden irreps (overrides --l-h)");
  tr->add_option("--dataset", dataset_file, "dataset file (default: generate)")->check(CLI::ExistingFile);

  auto* e1 = app.add_subcommand("exp1", "error per output channel versus hidden l_h");
  add_common(e1, e1_c);
  auto* e2 = app.add_subcommand("exp2", "error on truncated datasets versus hidden l_h");
  add_common(e2, e2_c);
  auto* e3 = app.add_subcommand("exp3", "feature-norm trajectories on standard and scaled data");
  add_common(e3, e3_c);

  std::string ckpt, eval_data, eval_out;
  double spacing = 0.5, padding = 4.0;
  auto* ev = app.add_subcommand("eval", "density errors of a checkpoint on a dataset");
  ev->add_option("--checkpoint", ckpt, "model checkpoint")->required()->check(CLI::ExistingFile);
  ev->add_option("--dataset", eval_data, "dataset file")->required()->check(CLI::ExistingFile);
  ev->add_option("--spacing", spacing, "grid spacing in Angstrom")->check(CLI::PositiveNumber);
  ev->add_option("--padding", padding, "grid padding in Angstrom")->check(CLI::NonNegativeNumber);
  ev->add_option("--out", eval_out, "directory for eval.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto cfg = resolve(gen_c);
      auto ds = exp::standard_dataset(cfg);
      if (truncate >= 0) ds = data::truncate_dataset(ds, truncate);
      if (scale) ds = data::scale_dataset(ds);
      fs::create_directories(cfg.out_dir);
      const auto path = (fs::path(cfg.out_dir) / (gzip ? "dataset.gz" : "dataset.txt")).string();
      data::save_dataset(ds, path);
      std::printf("wrote %zu structures to %s\n", ds.size(), path.c_str());
      for (const auto& [l, sd] : data::pooled_stds(ds)) std::printf("std l=%d %.6g\n", l, sd);
    } else if (*tr) {
      auto cfg = resolve(train_c);
      if (!dataset_file.empty()) cfg.dataset_file = dataset_file;
      const auto ds = exp::standard_dataset(cfg);
      const auto parts = exp::split_dataset(ds, cfg);
      const auto spec = hidden.empty() ? hidden_config(train_lh, cfg.n_s) : IrrepsSpec::parse(hidden);
      const auto rec = exp::train(exp::model_config(cfg, spec, ds.basis), parts.train, parts.test,
                                  exp::train_settings(cfg), spec.str());
      const fs::path out(cfg.out_dir);
      fs::create_directories(out);
      net::save_checkpoint(net::Model(rec.model, rec.params), (out / "model.ckpt").string());
      data::save_dataset(parts.test, (out / "test.dataset").string());
      exp::emit_csv(exp::loss_table(rec), (out / "loss.csv").string());
      exp::emit_csv(exp::norm_table(rec), (out / "norms.csv").string());
      nlohmann::json j = {{"hidden", spec.str()}, {"param_count", rec.param_count},
                          {"wall_seconds", rec.wall_seconds}, {"eps_total", rec.final_eval.eps_total}};
      write_text_file((out / "train_summary.json").string(), j.dump(2) + "\n");
      std::printf("hidden %s, %zu parameters, final loss %.6g\n", spec.str().c_str(), rec.param_count,
                  rec.epoch_loss.back());
      print_eval(rec.final_eval);
    } else if (*e1) {
      const auto cfg = resolve(e1_c);
      const auto r = exp::experiment1(cfg);
      exp::write_outputs(r, cfg);
      std::cout << exp::format_csv(r.table);
      print_advisories(r.advisories);
    } else if (*e2) {
      const auto cfg = resolve(e2_c);
      const auto r = exp::experiment2(cfg);
      exp::write_outputs(r, cfg);
      std::cout << exp::format_csv(r.table) << exp::format_csv(r.plateau);
    } else if (*e3) {
      const auto cfg = resolve(e3_c);
      const auto r = exp::experiment3(cfg);
      exp::write_outputs(r, cfg);
      for (const auto& run : r.runs) std::printf("%s: eps_total %.6g\n", run.label.c_str(), run.final_eval.eps_total);
      print_advisories(r.advisories);
    } else if (*ev) {
      const auto model = net::load_checkpoint(ckpt);
      const auto ds = data::load_dataset(eval_data);
      const auto e = exp::evaluate(model, ds, spacing, padding);
      print_eval(e);
      if (!eval_out.empty()) {
        fs::create_directories(eval_out);
        exp::Table t({"metric", "value"});
        t.add_row({"eps_total", e.eps_total});
        for (const auto& [l, v] : e.eps_l) t.add_row({"eps_" + std::to_string(l), v});
        t.add_row({"mse", e.loss});
        exp::emit_csv(t, (fs::path(eval_out) / "eval.csv").string());
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "densnet: %s\n", e.what());
    return 1;
  }
  return 0;
}
