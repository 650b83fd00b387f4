#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gge/metrics/metrics.hpp"

namespace gge::metrics {

// Prediction dump, one tab-separated record per instance after a header line:
//   pred_index  score  type_id  attention  mask
// with attention and mask as space-separated reals.
void save_predictions(const std::vector<PredictionRecord>& records, std::ostream& out);
void save_predictions(const std::vector<PredictionRecord>& records,
                      const std::filesystem::path& path);
std::vector<PredictionRecord> load_predictions(std::istream& in,
                                               const std::string& source = "<stream>");
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path);

// "metric,value" rows; per-type accuracy as accuracy_type_<t>. Reads back
// exactly what was written.
void write_report_csv(const MetricsReport& report, std::ostream& out);
MetricsReport read_report_csv(std::istream& in, const std::string& source = "<stream>");

// "threshold,cap,cgr,cgw,cgd" rows.
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);
std::vector<SweepRow> read_sweep_csv(std::istream& in, const std::string& source = "<stream>");

std::string report_table(const MetricsReport& report);
std::string sweep_table(const std::vector<SweepRow>& rows);

}  // namespace gge::metrics
