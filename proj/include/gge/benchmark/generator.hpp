#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gge/models/architecture.hpp"
#include "gge/nn/matrix.hpp"

namespace gge::benchmark {

/// Synthetic changing-prior benchmark.
///
/// Answers are partitioned into T disjoint per-type sets of size C / T; answer
/// a belongs to type a / (C / T) and the first answer of each type is its head.
struct GeneratorConfig {
  std::size_t classes = 20;
  std::size_t types = 4;
  std::size_t regions = 8;
  std::size_t evidence_dim = 16;
  std::size_t context_dim = 16;
  std::size_t n_train = 8000;
  std::size_t n_test = 2000;
  double head_mass = 0.7;      // train prior mass of each type's head answer
  double shortcut_rate = 0.8;  // P(context cue names the true answer) in train / test_id
  double noise_sigma = 0.4;
  bool soft_labels = false;
  std::uint64_t seed = 1;

  std::size_t answers_per_type() const noexcept { return types ? classes / types : 0; }
  // Throws ValidationError listing every violated constraint.
  void validate() const;
  // Stable key=value rendering; the digest is its FNV-1a hash.
  std::string canonical() const;
  std::string digest() const;
  models::ArchitectureSpec architecture(std::size_t hidden = 32) const;

  bool operator==(const GeneratorConfig&) const = default;
};

enum class Split { Train, TestOod, TestId };

std::string_view split_name(Split s) noexcept;
// Throws ValidationError for an unknown name.
Split parse_split(std::string_view name);

struct Dataset {
  std::vector<models::Instance> instances;
  GeneratorConfig config;  // generator echo; shapes and T come from here
  Split split = Split::Train;

  std::size_t size() const noexcept { return instances.size(); }
  bool empty() const noexcept { return instances.empty(); }

  bool operator==(const Dataset&) const = default;
};

struct Splits {
  Dataset train;
  Dataset test_ood;
  Dataset test_id;
};

/// Fixed, seed-determined prototypes shared by all splits.
struct Prototypes {
  nn::Matrix evidence;  // classes x evidence_dim, unit rows
  nn::Matrix context;   // classes x context_dim, unit rows
  std::vector<std::vector<std::size_t>> near_answers;  // two nearest same-type answers
};

Prototypes make_prototypes(const GeneratorConfig& config);

// Per-type answer prior of a split, classes entries per row.
nn::Matrix split_prior(const GeneratorConfig& config, Split split);

Splits generate(const GeneratorConfig& config);
Dataset generate_split(const GeneratorConfig& config, const Prototypes& protos, Split split);

// T x C empirical answer distribution: per type, summed labels normalized to 1.
// Types with no label mass get an all-zero row.
nn::Matrix summarize_priors(const Dataset& data);

// Replaces every mask score s with 1 - s.
Dataset invert_grounding(const Dataset& data);

// All instances satisfy shape, type, label and mask invariants.
void validate_dataset(const Dataset& data);

}  // namespace gge::benchmark
