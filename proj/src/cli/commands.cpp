#include "gge/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "gge/benchmark/dataset_io.hpp"
#include "gge/ensemble/predict.hpp"
#include "gge/error.hpp"
#include "gge/metrics/report_io.hpp"
#include "gge/nn/checkpoint.hpp"
#include "gge/text.hpp"

namespace gge::cli {

namespace {

using benchmark::Split;

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  auto out = open_out(path);
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

metrics::GroundingMode mode_of(const EvalOptions& o) {
  return o.strict ? metrics::GroundingMode::All : metrics::GroundingMode::Any;
}

void write_losses_csv(const ensemble::RunRecord& rec, std::ostream& out) {
  out << "epoch";
  for (const auto& c : rec.loss_columns) out << ',' << c;
  out << '\n';
  for (std::size_t e = 0; e < rec.epoch_losses.size(); ++e) {
    out << e;
    for (const auto& c : rec.loss_columns) out << ',' << text::format_double(rec.epoch_losses[e].at(c));
    out << '\n';
  }
}

void write_matrix_csv(const nn::Matrix& m, std::ostream& out) {
  out << "type";
  for (std::size_t j = 0; j < m.cols(); ++j) out << ",a" << j;
  out << '\n';
  for (std::size_t t = 0; t < m.rows(); ++t) {
    out << t;
    for (double v : m.row(t)) out << ',' << text::format_double(v);
    out << '\n';
  }
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

AblationCell run_cell(const RunConfig& base, const AblationRun& run, std::size_t replicate) {
  RunConfig c = base;
  c.generator.seed = base.generator.seed + replicate;
  c.training.seed = base.training.seed + replicate;
  c.training.variant = run.variant;
  c.training.schedule = run.schedule;
  c.training.vision_only = run.vision_only;
  const auto splits = benchmark::generate(c.generator);
  const auto arch = c.architecture();
  const auto rec = ensemble::train(c.training, arch, splits.train);
  const auto& base_params = rec.params.at("base");
  const auto kind = c.training.base_kind();
  const double t = c.evaluation.threshold;
  const std::size_t cap = c.evaluation.cap;
  const auto mode = c.evaluation.strict ? metrics::GroundingMode::All : metrics::GroundingMode::Any;

  const auto ood = ensemble::predict(base_params, kind, arch, splits.test_ood);
  const auto id = ensemble::predict(base_params, kind, arch, splits.test_id);
  const auto ood_report = metrics::cgr_cgw_cgd(ood, t, cap, mode);
  const auto id_report = metrics::cgr_cgw_cgd(id, t, cap, mode);
  const auto inverted = metrics::cgr_cgw_cgd(metrics::invert_grounding(ood), t, cap, mode);

  AblationCell cell;
  cell.run = run.label;
  cell.seed = c.training.seed;
  cell.ood_accuracy = ood_report.accuracy.overall;
  cell.id_accuracy = id_report.accuracy.overall;
  cell.ood_cgd = ood_report.cgd;
  cell.id_cgd = id_report.cgd;
  cell.ood_cgd_inverted = inverted.cgd;
  return cell;
}

std::vector<AblationSummary> read_ablation_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) ||
      text::trim(line) != "run,seeds,ood_mean,ood_std,id_mean,id_std,cgd_mean,cgd_std") {
    throw ParseError(source, 1, "missing ablation header");
  }
  std::vector<AblationSummary> rows;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (text::trim(line).empty()) continue;
    const auto f = text::split(line, ',');
    if (f.size() != 8) throw ParseError(source, n, "expected 8 fields");
    AblationSummary r;
    r.run = std::string(f[0]);
    auto s = text::parse_int(f[1]);
    if (!s || *s < 0) throw ParseError(source, n, "seeds is not a count");
    r.seeds = static_cast<std::size_t>(*s);
    double* dst[] = {&r.ood_mean, &r.ood_std, &r.id_mean, &r.id_std, &r.cgd_mean, &r.cgd_std};
    for (std::size_t i = 0; i < 6; ++i) {
      auto v = text::parse_double(f[i + 2]);
      if (!v) throw ParseError(source, n, "field " + std::to_string(i + 3) + " is not a number");
      *dst[i] = *v;
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

std::vector<fs::path> cmd_gen_data(const RunConfig& config, const fs::path& out_dir) {
  config.validate();
  make_dirs(out_dir);
  const auto splits = benchmark::generate(config.generator);
  std::vector<fs::path> written;
  const std::pair<Split, const benchmark::Dataset*> all[] = {
      {Split::Train, &splits.train}, {Split::TestOod, &splits.test_ood}, {Split::TestId, &splits.test_id}};

  std::ostringstream csv;
  csv << "split,type,answer,mass\n";
  std::vector<std::vector<std::string>> table{{"split", "type", "head answer", "head mass"}};
  const std::size_t k = config.generator.answers_per_type();
  for (const auto& [split, data] : all) {
    const auto path = benchmark::split_path(out_dir, split);
    benchmark::save_dataset(*data, path);
    written.push_back(path);
    const auto priors = benchmark::summarize_priors(*data);
    for (std::size_t t = 0; t < priors.rows(); ++t) {
      for (std::size_t a = 0; a < priors.cols(); ++a) {
        if (priors(t, a) == 0.0) continue;
        csv << benchmark::split_name(split) << ',' << t << ',' << a << ','
            << text::format_double(priors(t, a)) << '\n';
      }
      table.push_back({std::string(benchmark::split_name(split)), std::to_string(t),
                       std::to_string(t * k), text::format_fixed(priors(t, t * k), 4)});
    }
  }
  write_file(out_dir / "priors.csv", csv.str());
  write_file(out_dir / "priors.txt", text::aligned_table(table));
  written.push_back(out_dir / "priors.csv");
  written.push_back(out_dir / "priors.txt");
  return written;
}

ensemble::RunRecord cmd_train(const RunConfig& config, const fs::path& data_dir,
                              const fs::path& run_dir) {
  config.validate();
  const auto train = benchmark::load_dataset(benchmark::split_path(data_dir, Split::Train));
  if (train.config.regions != config.generator.regions ||
      train.config.evidence_dim != config.generator.evidence_dim ||
      train.config.context_dim != config.generator.context_dim ||
      train.config.classes != config.generator.classes) {
    throw ConfigError("dataset shapes in " + data_dir.string() + " differ from [generator]");
  }
  const auto rec = ensemble::train(config.training, config.architecture(), train);

  make_dirs(run_dir / "checkpoints");
  write_file(run_dir / "config.ini", render_run_config(config));
  {
    auto out = open_out(run_dir / "losses.csv");
    write_losses_csv(rec, out);
  }
  for (const auto& [name, params] : rec.params) {
    nn::save_params(params, run_dir / "checkpoints" / (name + ".jsonl"));
  }
  if (rec.bias) {
    auto out = open_out(run_dir / "bias.csv");
    write_matrix_csv(rec.bias->table, out);
  }
  write_file(run_dir / "run_info.txt",
             "wall_seconds = " + text::format_fixed(rec.wall_seconds, 3) + "\n");
  return rec;
}

std::vector<metrics::PredictionRecord> run_predictions(const fs::path& run_dir,
                                                       const fs::path& dataset_path) {
  const auto config = load_run_config(run_dir / "config.ini");
  const auto ckpt = run_dir / "checkpoints" / "base.jsonl";
  if (!fs::exists(ckpt)) throw IoError("missing checkpoint " + ckpt.string());
  const auto params = nn::load_params(ckpt);
  const auto data = benchmark::load_dataset(dataset_path);
  return ensemble::predict(params, config.training.base_kind(), config.architecture(), data);
}

metrics::MetricsReport cmd_eval(const std::vector<metrics::PredictionRecord>& records,
                                const EvalOptions& options, const fs::path& out_stem) {
  const std::size_t cap = options.cap ? *options.cap : metrics::paired_cap(options.threshold);
  const auto scored = options.invert_grounding ? metrics::invert_grounding(records) : records;
  const auto report = metrics::cgr_cgw_cgd(scored, options.threshold, cap, mode_of(options));
  if (!out_stem.parent_path().empty()) make_dirs(out_stem.parent_path());
  {
    auto out = open_out(fs::path(out_stem.string() + ".csv"));
    metrics::write_report_csv(report, out);
  }
  write_file(fs::path(out_stem.string() + ".txt"), metrics::report_table(report));
  return report;
}

std::vector<metrics::SweepRow> cmd_sweep(const std::vector<metrics::PredictionRecord>& records,
                                         const EvalOptions& options, const fs::path& out_stem) {
  const auto scored = options.invert_grounding ? metrics::invert_grounding(records) : records;
  const auto rows = metrics::sweep_thresholds(scored, metrics::kSweepThresholds, mode_of(options));
  if (!out_stem.parent_path().empty()) make_dirs(out_stem.parent_path());
  {
    auto out = open_out(fs::path(out_stem.string() + ".csv"));
    metrics::write_sweep_csv(rows, out);
  }
  write_file(fs::path(out_stem.string() + ".txt"), metrics::sweep_table(rows));
  return rows;
}

std::vector<AblationCell> run_ablation(const RunConfig& config,
                                       const std::vector<std::string>& runs, std::size_t seeds,
                                       std::size_t jobs) {
  config.validate();
  if (seeds == 0) throw ConfigError("ablation needs at least one seed");
  std::vector<AblationRun> parsed;
  for (const auto& r : runs) parsed.push_back(parse_ablation_run(r));

  const std::size_t total = parsed.size() * seeds;
  std::vector<AblationCell> cells(total);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::string error;

  const auto worker = [&] {
    while (!failed) {
      const std::size_t i = next++;
      if (i >= total) return;
      const auto& run = parsed[i / seeds];
      const std::size_t replicate = i % seeds;
      try {
        cells[i] = run_cell(config, run, replicate);
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (!failed.exchange(true)) {
          error = "run '" + run.label + "' seed " +
                  std::to_string(config.training.seed + replicate) + ": " + e.what();
        }
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(jobs, total));
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < n_threads; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failed) throw Error(error);
  return cells;
}

std::vector<AblationSummary> summarize_ablation(const std::vector<AblationCell>& cells,
                                                const std::vector<std::string>& runs) {
  std::vector<AblationSummary> out;
  for (const auto& run : runs) {
    std::vector<double> ood, id, cgd;
    for (const auto& c : cells) {
      if (c.run != run) continue;
      ood.push_back(c.ood_accuracy);
      id.push_back(c.id_accuracy);
      cgd.push_back(c.ood_cgd);
    }
    out.push_back({run, ood.size(), mean(ood), sample_std(ood), mean(id), sample_std(id),
                   mean(cgd), sample_std(cgd)});
  }
  return out;
}

std::string ablation_table(const std::vector<AblationSummary>& rows) {
  const auto pm = [](double m, double s, double scale) {
    return text::format_fixed(scale * m, 2) + " ± " + text::format_fixed(scale * s, 2);
  };
  std::vector<std::vector<std::string>> t{{"run", "seeds", "OOD acc", "ID acc", "CGD (OOD)"}};
  for (const auto& r : rows) {
    t.push_back({r.run, std::to_string(r.seeds), pm(r.ood_mean, r.ood_std, 100.0),
                 pm(r.id_mean, r.id_std, 100.0), pm(r.cgd_mean, r.cgd_std, 1.0)});
  }
  return text::aligned_table(t);
}

std::vector<AblationSummary> cmd_ablate(const RunConfig& config, const fs::path& out_dir) {
  const auto& runs = config.ablation.runs;
  const auto cells = run_ablation(config, runs, config.ablation.seeds, config.ablation.jobs);
  const auto summary = summarize_ablation(cells, runs);
  make_dirs(out_dir);
  write_file(out_dir / "config.ini", render_run_config(config));
  {
    auto out = open_out(out_dir / "ablation_runs.csv");
    out << "run,seed,ood_accuracy,id_accuracy,ood_cgd,id_cgd,ood_cgd_inverted\n";
    for (const auto& c : cells) {
      out << c.run << ',' << c.seed << ',' << text::format_double(c.ood_accuracy) << ','
          << text::format_double(c.id_accuracy) << ',' << text::format_double(c.ood_cgd) << ','
          << text::format_double(c.id_cgd) << ',' << text::format_double(c.ood_cgd_inverted) << '\n';
    }
  }
  {
    auto out = open_out(out_dir / "ablation.csv");
    out << "run,seeds,ood_mean,ood_std,id_mean,id_std,cgd_mean,cgd_std\n";
    for (const auto& r : summary) {
      out << r.run << ',' << r.seeds << ',' << text::format_double(r.ood_mean) << ','
          << text::format_double(r.ood_std) << ',' << text::format_double(r.id_mean) << ','
          << text::format_double(r.id_std) << ',' << text::format_double(r.cgd_mean) << ','
          << text::format_double(r.cgd_std) << '\n';
    }
  }
  write_file(out_dir / "ablation.txt", ablation_table(summary));
  return summary;
}

std::string cmd_report(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string out;
  for (const auto& f : files) {
    const std::string name = f.filename().string();
    std::istringstream in(read_file(f));
    std::string body;
    if (name == "ablation.csv") {
      body = ablation_table(read_ablation_csv(in, f.string()));
    } else if (name.starts_with("sweep")) {
      body = metrics::sweep_table(metrics::read_sweep_csv(in, f.string()));
    } else if (name.starts_with("report")) {
      body = metrics::report_table(metrics::read_report_csv(in, f.string()));
    } else {
      continue;
    }
    out += "== " + name + "\n" + body + "\n";
  }
  if (out.empty()) throw IoError("no report, sweep or ablation CSV in " + dir.string());
  return out;
}

}  // namespace gge::cli
