// gge: data generation, training, evaluation and ablation front end.
#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "gge/benchmark/dataset_io.hpp"
#include "gge/cli/commands.hpp"
#include "gge/error.hpp"
#include "gge/metrics/report_io.hpp"
#include "gge/text.hpp"

namespace fs = std::filesystem;
using namespace gge;

namespace {

struct Overrides {
  std::string config;
  std::string data_dir;
  std::string run_dir;
  std::optional<std::uint64_t> seed;
  std::string variant;
  std::string schedule;
  std::string loss_family;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "run configuration file");
  cmd->add_option("--data-dir", o.data_dir, "dataset directory (overrides [paths] data_dir)");
  cmd->add_option("--run-dir", o.run_dir, "run directory (overrides [paths] run_dir)");
}

void add_training(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "training seed");
  cmd->add_option("--variant", o.variant, "baseline, gge-d, gge-q, gge-dq, ...");
  cmd->add_option("--schedule", o.schedule, "iter or tog");
  cmd->add_option("--loss-family", o.loss_family, "bce or sxce");
}

cli::RunConfig resolve(const Overrides& o) {
  cli::RunConfig c = o.config.empty() ? cli::RunConfig{} : cli::load_run_config(o.config);
  if (!o.data_dir.empty()) c.paths.data_dir = o.data_dir;
  if (!o.run_dir.empty()) c.paths.run_dir = o.run_dir;
  if (o.seed) c.training.seed = *o.seed;
  if (!o.variant.empty()) c.training.variant = ensemble::parse_variant(o.variant);
  if (!o.schedule.empty()) c.training.schedule = ensemble::parse_schedule(o.schedule);
  if (!o.loss_family.empty()) c.training.loss_family = ensemble::parse_loss_family(o.loss_family);
  c.validate();
  return c;
}

int fail(const std::string& command, const std::string& kind, const std::string& message) {
  nlohmann::json j{{"status", "error"}, {"command", command}, {"kind", kind}, {"message", message}};
  std::cerr << j.dump() << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Greedy gradient ensemble de-bias toolkit"};
  app.require_subcommand(1);

  Overrides o;
  std::string out_dir;

  auto* gen = app.add_subcommand("gen-data", "generate train / test_ood / test_id splits");
  add_common(gen, o);

  auto* train = app.add_subcommand("train", "train one configuration");
  add_common(train, o);
  add_training(train, o);

  std::string dataset, predictions_in, predictions_out, out_stem;
  double threshold = metrics::kDefaultThreshold;
  std::optional<std::size_t> cap;
  bool invert = false, strict = false;
  const auto add_eval = [&](CLI::App* cmd) {
    add_common(cmd, o);
    cmd->add_option("--dataset", dataset, "dataset file (default: <data-dir>/test_ood.tsv)");
    cmd->add_option("--predictions", predictions_in, "score an existing prediction dump instead");
    cmd->add_option("--dump", predictions_out, "also write the prediction dump here");
    cmd->add_option("--out", out_stem, "output stem (default: <run-dir>/<report|sweep>_<split>)");
    cmd->add_flag("--invert-grounding", invert, "score against 1 - mask");
    cmd->add_flag("--strict", strict, "require every marked region to be sensitive");
  };
  auto* eval = app.add_subcommand("eval", "score the base model of a run");
  add_eval(eval);
  eval->add_option("--threshold", threshold, "attention threshold t");
  eval->add_option("--cap", cap, "sensitive-set cap (default: paired with t)");

  auto* sweep = app.add_subcommand("sweep", "CGR / CGW / CGD at t = 0.1 .. 0.4");
  add_eval(sweep);

  std::optional<std::size_t> seeds, jobs;
  auto* ablate = app.add_subcommand("ablate", "train the ablation suite over several seeds");
  add_common(ablate, o);
  add_training(ablate, o);
  ablate->add_option("--seeds", seeds, "number of replicates");
  ablate->add_option("--jobs", jobs, "parallel worker threads");
  ablate->add_option("--out", out_dir, "output directory (default: <run-dir>)");

  std::string report_dir;
  auto* report = app.add_subcommand("report", "print tables from report / sweep / ablation CSVs");
  report->add_option("dir", report_dir, "directory holding the CSVs")->required();

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    if (*report) {
      std::cout << cli::cmd_report(report_dir);
      return 0;
    }
    auto config = resolve(o);
    if (*gen) {
      for (const auto& p : cli::cmd_gen_data(config, config.paths.data_dir)) {
        std::cout << p.string() << '\n';
      }
      return 0;
    }
    if (*train) {
      const auto rec = cli::cmd_train(config, config.paths.data_dir, config.paths.run_dir);
      std::cout << "trained " << ensemble::variant_name(rec.config.variant) << " ("
                << ensemble::schedule_name(rec.config.schedule) << ") in "
                << text::format_fixed(rec.wall_seconds, 1) << " s -> "
                << config.paths.run_dir.string() << '\n';
      return 0;
    }
    if (*eval || *sweep) {
      const bool is_sweep = sweep->parsed();
      fs::path data = dataset.empty() ? benchmark::split_path(config.paths.data_dir,
                                                              benchmark::Split::TestOod)
                                      : fs::path(dataset);
      const auto records = predictions_in.empty()
                               ? cli::run_predictions(config.paths.run_dir, data)
                               : metrics::load_predictions(fs::path(predictions_in));
      if (!predictions_out.empty()) metrics::save_predictions(records, fs::path(predictions_out));
      fs::path stem = out_stem;
      if (stem.empty()) {
        const std::string source = predictions_in.empty() ? data.stem().string()
                                                          : fs::path(predictions_in).stem().string();
        stem = config.paths.run_dir /
               ((is_sweep ? "sweep_" : "report_") + source + (invert ? "_inverted" : ""));
      }
      cli::EvalOptions opts;
      opts.threshold = is_sweep ? config.evaluation.threshold : threshold;
      opts.cap = cap;
      if (!is_sweep && !eval->count("--threshold")) {
        opts.threshold = config.evaluation.threshold;
        if (!cap) opts.cap = config.evaluation.cap;
      }
      opts.invert_grounding = invert || config.evaluation.invert_grounding;
      opts.strict = strict || config.evaluation.strict;
      if (is_sweep) {
        std::cout << metrics::sweep_table(cli::cmd_sweep(records, opts, stem));
      } else {
        std::cout << metrics::report_table(cli::cmd_eval(records, opts, stem));
      }
      return 0;
    }
    if (*ablate) {
      if (seeds) config.ablation.seeds = *seeds;
      if (jobs) config.ablation.jobs = *jobs;
      config.validate();
      const fs::path dir = out_dir.empty() ? config.paths.run_dir : fs::path(out_dir);
      std::cout << cli::ablation_table(cli::cmd_ablate(config, dir));
      return 0;
    }
  } catch (const gge::Error& e) {
    return fail(command, e.kind(), e.what());
  } catch (const std::exception& e) {
    return fail(command, "internal", e.what());
  }
  return 0;
}
