#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "gge/nn/matrix.hpp"

namespace gge::metrics {

struct PredictionRecord {
  std::size_t pred_index = 0;  // argmax of base logits
  double score = 0.0;          // label score of pred_index
  std::size_t type_id = 0;
  nn::Vector attention;
  nn::Vector mask;

  bool operator==(const PredictionRecord&) const = default;
};

// Regions with mask >= this count as ground truth.
inline constexpr double kMaskOn = 0.5;
inline constexpr double kDefaultThreshold = 0.2;

enum class GroundingMode {
  Any,  // at least one ground-truth region is sensitive
  All,  // every ground-truth region is sensitive
};

// 0.1 -> 9, 0.2 -> 4, 0.3 -> 3, 0.4 -> 2, otherwise floor(0.9 / t).
std::size_t paired_cap(double t);

// Sensitive set: regions with attention >= t, keeping the `cap` largest
// (ties to the lower index). Throws ValidationError unless 0 < t < 1 and cap >= 1.
std::vector<std::size_t> sensitive_regions(std::span<const double> attention, double t,
                                           std::size_t cap);

bool grounding_hit(std::span<const double> attention, std::span<const double> mask, double t,
                   std::size_t cap, GroundingMode mode = GroundingMode::Any);

// A record is gradable when some region is marked.
bool gradable(const PredictionRecord& r);

struct Accuracy {
  double overall = 0.0;
  std::map<std::size_t, double> per_type;
  bool operator==(const Accuracy&) const = default;
};

// Throws ValidationError on an empty list.
Accuracy soft_accuracy(std::span<const PredictionRecord> records);

// Accuracy is a fraction in [0, 1]; CGR, CGW and CGD are percentages.
struct MetricsReport {
  Accuracy accuracy;
  double cgr = 0.0;
  double cgw = 0.0;
  double cgd = 0.0;
  std::size_t n_rp = 0;     // gradable right predictions
  std::size_t n_wp = 0;     // gradable wrong predictions
  std::size_t n_rg_rp = 0;  // ... of which grounded
  std::size_t n_rg_wp = 0;
  std::size_t n_records = 0;
  std::size_t n_ungradable = 0;
  double threshold = kDefaultThreshold;
  std::size_t cap = 4;
  // A zero denominator reports its ratio as 0 and raises the matching flag.
  bool cgr_undefined = false;
  bool cgw_undefined = false;

  bool operator==(const MetricsReport&) const = default;
};

// Right prediction means score > 0. Throws ValidationError on an empty list.
MetricsReport cgr_cgw_cgd(std::span<const PredictionRecord> records, double t, std::size_t cap,
                          GroundingMode mode = GroundingMode::Any);

struct SweepRow {
  double threshold = 0.0;
  std::size_t cap = 0;
  double cgr = 0.0;
  double cgw = 0.0;
  double cgd = 0.0;
  bool operator==(const SweepRow&) const = default;
};

inline const std::vector<double> kSweepThresholds{0.1, 0.2, 0.3, 0.4};

std::vector<SweepRow> sweep_thresholds(std::span<const PredictionRecord> records,
                                       std::span<const double> thresholds,
                                       GroundingMode mode = GroundingMode::Any);

// Complements every mask entry (1 - m).
std::vector<PredictionRecord> invert_grounding(std::vector<PredictionRecord> records);

}  // namespace gge::metrics
