#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gge/benchmark/generator.hpp"
#include "gge/ensemble/config.hpp"
#include "gge/metrics/metrics.hpp"
#include "gge/models/architecture.hpp"

namespace gge::cli {

struct EvaluationConfig {
  double threshold = metrics::kDefaultThreshold;
  std::size_t cap = 4;
  bool invert_grounding = false;
  bool strict = false;  // require every marked region to be sensitive
};

// One trained configuration of the ablation suite, e.g. "gge-dq-tog" or
// "gge-d-vo" (vision-only base).
struct AblationRun {
  std::string label;
  ensemble::Variant variant = ensemble::Variant::Baseline;
  ensemble::Schedule schedule = ensemble::Schedule::Iter;
  bool vision_only = false;
};

// Throws ConfigError for an unrecognised label.
AblationRun parse_ablation_run(std::string_view label);
const std::vector<std::string>& default_ablation_runs();

struct AblationConfig {
  std::size_t seeds = 5;
  std::size_t jobs = 1;
  std::vector<std::string> runs = default_ablation_runs();
};

struct PathsConfig {
  std::filesystem::path data_dir = "data";
  std::filesystem::path run_dir = "runs/default";
};

/// Sectioned key = value file:
///
///   [generator]  classes types regions evidence_dim context_dim n_train n_test
///                head_mass shortcut_rate noise_sigma soft_labels seed
///   [model]      hidden, plus optional regions evidence_dim context_dim classes
///                which must agree with [generator]
///   [training]   variant schedule loss_family epochs batch_size lr beta1 beta2
///                seed inverse_supervision_n vision_only
///   [evaluation] threshold cap invert_grounding strict
///   [ablation]   seeds jobs runs (comma-separated labels)
///   [paths]      data_dir run_dir
///
/// '#' and ';' start comments. Every key is typed; unknown sections or keys,
/// duplicates and ill-typed values raise ParseError with the line number.
struct RunConfig {
  benchmark::GeneratorConfig generator;
  std::size_t hidden = 32;
  ensemble::EnsembleConfig training;
  EvaluationConfig evaluation;
  AblationConfig ablation;
  PathsConfig paths;

  models::ArchitectureSpec architecture() const { return generator.architecture(hidden); }
  // Throws ConfigError / ValidationError on any bad value.
  void validate() const;
};

RunConfig parse_run_config(std::istream& in, const std::string& source = "<stream>");
RunConfig load_run_config(const std::filesystem::path& path);

// Full config in the same format; parse_run_config(render(c)) reproduces c.
std::string render_run_config(const RunConfig& config);

}  // namespace gge::cli
