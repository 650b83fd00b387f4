#include "gge/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gge/error.hpp"

namespace gge::metrics {

std::size_t paired_cap(double t) {
  if (!(t > 0.0 && t < 1.0)) throw ValidationError("threshold must lie in (0, 1)");
  static constexpr struct {
    double t;
    std::size_t cap;
  } kPairs[] = {{0.1, 9}, {0.2, 4}, {0.3, 3}, {0.4, 2}};
  for (const auto& p : kPairs) {
    if (std::abs(t - p.t) < 1e-12) return p.cap;
  }
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(0.9 / t)));
}

std::vector<std::size_t> sensitive_regions(std::span<const double> attention, double t,
                                           std::size_t cap) {
  if (!(t > 0.0 && t < 1.0)) throw ValidationError("threshold must lie in (0, 1)");
  if (cap == 0) throw ValidationError("cap must be at least 1");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < attention.size(); ++i) {
    if (attention[i] >= t) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return attention[a] > attention[b]; });
  if (idx.size() > cap) idx.resize(cap);
  return idx;
}

bool grounding_hit(std::span<const double> attention, std::span<const double> mask, double t,
                   std::size_t cap, GroundingMode mode) {
  if (attention.size() != mask.size()) {
    throw ShapeError("attention has " + std::to_string(attention.size()) + " regions, mask " +
                     std::to_string(mask.size()));
  }
  const auto s = sensitive_regions(attention, t, cap);
  const auto in_s = [&](std::size_t i) { return std::find(s.begin(), s.end(), i) != s.end(); };
  bool any_true = false;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] < kMaskOn) continue;
    any_true = true;
    const bool hit = in_s(i);
    if (mode == GroundingMode::Any && hit) return true;
    if (mode == GroundingMode::All && !hit) return false;
  }
  return mode == GroundingMode::All && any_true;
}

bool gradable(const PredictionRecord& r) {
  return std::any_of(r.mask.begin(), r.mask.end(), [](double m) { return m >= kMaskOn; });
}

Accuracy soft_accuracy(std::span<const PredictionRecord> records) {
  if (records.empty()) throw ValidationError("no prediction records");
  Accuracy acc;
  std::map<std::size_t, std::pair<double, std::size_t>> by_type;
  double total = 0.0;
  for (const auto& r : records) {
    total += r.score;
    auto& slot = by_type[r.type_id];
    slot.first += r.score;
    slot.second += 1;
  }
  acc.overall = total / static_cast<double>(records.size());
  for (const auto& [t, v] : by_type) acc.per_type[t] = v.first / static_cast<double>(v.second);
  return acc;
}

MetricsReport cgr_cgw_cgd(std::span<const PredictionRecord> records, double t, std::size_t cap,
                          GroundingMode mode) {
  MetricsReport rep;
  rep.accuracy = soft_accuracy(records);
  rep.threshold = t;
  rep.cap = cap;
  rep.n_records = records.size();
  for (const auto& r : records) {
    if (!gradable(r)) {
      ++rep.n_ungradable;
      continue;
    }
    const bool grounded = grounding_hit(r.attention, r.mask, t, cap, mode);
    if (r.score > 0.0) {
      ++rep.n_rp;
      rep.n_rg_rp += grounded;
    } else {
      ++rep.n_wp;
      rep.n_rg_wp += grounded;
    }
  }
  rep.cgr_undefined = rep.n_rp == 0;
  rep.cgw_undefined = rep.n_wp == 0;
  rep.cgr = rep.n_rp ? 100.0 * static_cast<double>(rep.n_rg_rp) / static_cast<double>(rep.n_rp) : 0.0;
  rep.cgw = rep.n_wp ? 100.0 * static_cast<double>(rep.n_rg_wp) / static_cast<double>(rep.n_wp) : 0.0;
  rep.cgd = rep.cgr - rep.cgw;
  return rep;
}

std::vector<SweepRow> sweep_thresholds(std::span<const PredictionRecord> records,
                                       std::span<const double> thresholds, GroundingMode mode) {
  std::vector<SweepRow> rows;
  for (double t : thresholds) {
    const std::size_t cap = paired_cap(t);
    const auto rep = cgr_cgw_cgd(records, t, cap, mode);
    rows.push_back({t, cap, rep.cgr, rep.cgw, rep.cgd});
  }
  return rows;
}

std::vector<PredictionRecord> invert_grounding(std::vector<PredictionRecord> records) {
  for (auto& r : records) {
    for (double& m : r.mask) m = 1.0 - m;
  }
  return records;
}

}  // namespace gge::metrics
