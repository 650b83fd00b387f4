#include "gge/benchmark/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gge/error.hpp"
#include "gge/nn/rng.hpp"
#include "gge/text.hpp"

namespace gge::benchmark {

using models::Instance;
using nn::Matrix;
using nn::Rng;
using nn::Vector;

void GeneratorConfig::validate() const {
  std::vector<std::string> issues;
  if (classes < 1) issues.push_back("classes must be >= 1");
  if (types < 1) issues.push_back("types must be >= 1");
  if (types >= 1 && classes % types != 0) issues.push_back("classes must be divisible by types");
  const std::size_t k = answers_per_type();
  if (types >= 1 && classes % types == 0 && k < 2) issues.push_back("need at least 2 answers per type");
  if (regions < 1) issues.push_back("regions must be >= 1");
  if (evidence_dim < 1) issues.push_back("evidence_dim must be >= 1");
  if (context_dim < types) issues.push_back("context_dim must be >= types (type one-hot)");
  if (n_train < 1) issues.push_back("n_train must be >= 1");
  if (n_test < 1) issues.push_back("n_test must be >= 1");
  if (k >= 2 && !(head_mass >= 1.0 / static_cast<double>(k) - 1e-12 && head_mass < 1.0)) {
    issues.push_back("head_mass must lie in [1/answers_per_type, 1)");
  }
  if (!(shortcut_rate >= 0.0 && shortcut_rate <= 1.0)) issues.push_back("shortcut_rate must lie in [0, 1]");
  if (!(noise_sigma > 0.0) || !std::isfinite(noise_sigma)) issues.push_back("noise_sigma must be > 0");
  if (soft_labels && k < 3) issues.push_back("soft_labels needs at least 3 answers per type");
  if (!issues.empty()) {
    std::string msg = "invalid generator config:";
    for (const auto& s : issues) msg += "\n  - " + s;
    throw ValidationError(msg);
  }
}

std::string GeneratorConfig::canonical() const {
  using text::format_double;
  return "classes=" + std::to_string(classes) + " types=" + std::to_string(types) +
         " regions=" + std::to_string(regions) + " evidence_dim=" + std::to_string(evidence_dim) +
         " context_dim=" + std::to_string(context_dim) + " n_train=" + std::to_string(n_train) +
         " n_test=" + std::to_string(n_test) + " head_mass=" + format_double(head_mass) +
         " shortcut_rate=" + format_double(shortcut_rate) +
         " noise_sigma=" + format_double(noise_sigma) +
         " soft_labels=" + (soft_labels ? "true" : "false") + " seed=" + std::to_string(seed);
}

std::string GeneratorConfig::digest() const { return text::hex64(text::fnv1a(canonical())); }

models::ArchitectureSpec GeneratorConfig::architecture(std::size_t hidden) const {
  return {regions, evidence_dim, context_dim, hidden, classes};
}

std::string_view split_name(Split s) noexcept {
  switch (s) {
    case Split::Train: return "train";
    case Split::TestOod: return "test_ood";
    case Split::TestId: return "test_id";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "test_ood") return Split::TestOod;
  if (name == "test_id") return Split::TestId;
  throw ValidationError("unknown split '" + std::string(name) + "'");
}

namespace {

void unit_row(Rng& rng, std::span<double> row) {
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& v : row) {
      v = rng.normal();
      norm += v * v;
    }
  } while (norm < 1e-12);
  norm = std::sqrt(norm);
  for (double& v : row) v /= norm;
}

std::size_t sample_categorical(Rng& rng, std::span<const double> probs) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  // Rounding left a sliver above the last cumulative sum.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return i;
  }
  return 0;
}

}  // namespace

Prototypes make_prototypes(const GeneratorConfig& config) {
  Prototypes p;
  Rng rng(nn::derive_seed(config.seed, "prototypes"));
  Rng ev = rng.split("evidence");
  Rng cx = rng.split("context");
  p.evidence = Matrix(config.classes, config.evidence_dim);
  p.context = Matrix(config.classes, config.context_dim);
  const std::size_t k = config.answers_per_type();
  for (std::size_t a = 0; a < config.classes; ++a) {
    unit_row(ev, p.evidence.row(a));
    unit_row(cx, p.context.row(a));
  }
  p.near_answers.resize(config.classes);
  for (std::size_t a = 0; a < config.classes; ++a) {
    const std::size_t first = (a / k) * k;
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t b = first; b < first + k; ++b) {
      if (b == a) continue;
      double d = 0.0;
      for (std::size_t j = 0; j < config.evidence_dim; ++j) {
        const double diff = p.evidence(a, j) - p.evidence(b, j);
        d += diff * diff;
      }
      dist.emplace_back(d, b);
    }
    std::sort(dist.begin(), dist.end());
    for (std::size_t i = 0; i < std::min<std::size_t>(2, dist.size()); ++i) {
      p.near_answers[a].push_back(dist[i].second);
    }
  }
  return p;
}

Matrix split_prior(const GeneratorConfig& config, Split split) {
  const std::size_t k = config.answers_per_type();
  const double head = config.head_mass;
  const double rest = (1.0 - head) / static_cast<double>(k - 1);
  // Within-type prior over the k answers; head first.
  Vector local(k, rest);
  local[0] = head;
  if (split == Split::TestOod) {
    // Reverse the ranking: weight each answer by the inverse of its train mass,
    // so the head becomes the rarest answer.
    double total = 0.0;
    for (double& v : local) {
      v = 1.0 / v;
      total += v;
    }
    for (double& v : local) v /= total;
  }
  Matrix prior(config.types, config.classes);
  for (std::size_t t = 0; t < config.types; ++t) {
    for (std::size_t j = 0; j < k; ++j) prior(t, t * k + j) = local[j];
  }
  return prior;
}

Dataset generate_split(const GeneratorConfig& config, const Prototypes& protos, Split split) {
  config.validate();
  const std::size_t k = config.answers_per_type();
  const std::size_t n = split == Split::Train ? config.n_train : config.n_test;
  const Matrix prior = split_prior(config, split);
  const Rng root(nn::derive_seed(config.seed, split_name(split)));
  // noise_sigma is the expected norm of the noise vector, comparable to the
  // unit-norm prototypes, so it is spread over the coordinates.
  const double ev_sigma = config.noise_sigma / std::sqrt(static_cast<double>(config.evidence_dim));
  const double cx_sigma = config.noise_sigma / std::sqrt(static_cast<double>(config.context_dim));

  Dataset data;
  data.config = config;
  data.split = split;
  data.instances.reserve(n);
  for (std::size_t idx = 0; idx < n; ++idx) {
    Rng rng = root.split(static_cast<std::uint64_t>(idx));
    Instance inst;
    inst.type_id = rng.below(config.types);
    const std::size_t t = inst.type_id;
    const std::size_t answer = sample_categorical(rng, prior.row(t));

    // Evidence: one signal region carrying the answer prototype; the others
    // carry prototypes of answers from other types.
    inst.evidence = Matrix(config.regions, config.evidence_dim);
    inst.grounding_mask.assign(config.regions, 0.0);
    const std::size_t signal = rng.below(config.regions);
    inst.grounding_mask[signal] = 1.0;
    for (std::size_t r = 0; r < config.regions; ++r) {
      std::size_t proto = answer;
      if (r != signal) {
        if (config.types > 1) {
          // Uniform over the answers outside type t.
          std::size_t pick = rng.below(config.classes - k);
          proto = pick < t * k ? pick : pick + k;
        } else {
          std::size_t pick = rng.below(k - 1);
          proto = pick < answer ? pick : pick + 1;
        }
      }
      auto row = inst.evidence.row(r);
      for (std::size_t d = 0; d < config.evidence_dim; ++d) {
        row[d] = protos.evidence(proto, d) + ev_sigma * rng.normal();
      }
    }

    // Context: type one-hot + answer cue + noise. The cue names the true
    // answer with probability shortcut_rate in train / test_id and never in test_ood.
    const bool true_cue = split != Split::TestOod && rng.uniform() < config.shortcut_rate;
    std::size_t cue = answer;
    if (!true_cue) {
      const std::size_t pick = rng.below(k - 1);
      const std::size_t local = answer - t * k;
      cue = t * k + (pick < local ? pick : pick + 1);
    }
    inst.context.assign(config.context_dim, 0.0);
    inst.context[t] = 1.0;
    for (std::size_t d = 0; d < config.context_dim; ++d) {
      inst.context[d] += protos.context(cue, d) + cx_sigma * rng.normal();
    }

    inst.label.assign(config.classes, 0.0);
    if (config.soft_labels) {
      inst.label[answer] = 0.9;
      inst.label[protos.near_answers[answer][0]] = 0.6;
      inst.label[protos.near_answers[answer][1]] = 0.3;
    } else {
      inst.label[answer] = 1.0;
    }
    data.instances.push_back(std::move(inst));
  }
  return data;
}

Splits generate(const GeneratorConfig& config) {
  config.validate();
  const Prototypes protos = make_prototypes(config);
  return {generate_split(config, protos, Split::Train),
          generate_split(config, protos, Split::TestOod),
          generate_split(config, protos, Split::TestId)};
}

Matrix summarize_priors(const Dataset& data) {
  Matrix sums(data.config.types, data.config.classes);
  for (const auto& inst : data.instances) {
    if (inst.type_id >= data.config.types) {
      throw DataError("type_id " + std::to_string(inst.type_id) + " out of range");
    }
    nn::add_into(sums.row(inst.type_id), inst.label);
  }
  for (std::size_t t = 0; t < sums.rows(); ++t) {
    auto row = sums.row(t);
    const double total = std::accumulate(row.begin(), row.end(), 0.0);
    if (total > 0.0) {
      for (double& v : row) v /= total;
    }
  }
  return sums;
}

Dataset invert_grounding(const Dataset& data) {
  Dataset out = data;
  for (auto& inst : out.instances) {
    for (double& s : inst.grounding_mask) s = 1.0 - s;
  }
  return out;
}

void validate_dataset(const Dataset& data) {
  const auto arch = data.config.architecture();
  for (std::size_t i = 0; i < data.instances.size(); ++i) {
    const auto& inst = data.instances[i];
    const std::string where = "instance " + std::to_string(i) + ": ";
    try {
      models::check_instance(inst, arch);
    } catch (const ShapeError& e) {
      throw DataError(where + e.what());
    }
    if (inst.type_id >= data.config.types) throw DataError(where + "type_id out of range");
    for (double y : inst.label) {
      if (!(y >= 0.0 && y <= 1.0)) throw DataError(where + "label entry outside [0, 1]");
    }
    for (double m : inst.grounding_mask) {
      if (!(m >= 0.0 && m <= 1.0)) throw DataError(where + "mask entry outside [0, 1]");
    }
    if (!nn::all_finite(inst.evidence.values()) || !nn::all_finite(inst.context)) {
      throw DataError(where + "non-finite feature");
    }
  }
}

}  // namespace gge::benchmark
