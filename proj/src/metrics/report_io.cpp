#include "gge/metrics/report_io.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "gge/error.hpp"
#include "gge/text.hpp"

namespace gge::metrics {

namespace {

constexpr std::string_view kPredHeader = "#gge-predictions v1";

std::size_t parse_count(std::string_view s, const std::string& source, std::size_t line,
                        const char* field) {
  auto v = text::parse_int(s);
  if (!v || *v < 0) throw ParseError(source, line, std::string(field) + " is not a count");
  return static_cast<std::size_t>(*v);
}

double parse_real(std::string_view s, const std::string& source, std::size_t line,
                  const char* field) {
  auto v = text::parse_double(s);
  if (!v) throw ParseError(source, line, std::string(field) + " is not a number");
  return *v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

void save_predictions(const std::vector<PredictionRecord>& records, std::ostream& out) {
  out << kPredHeader << " count=" << records.size() << '\n';
  for (const auto& r : records) {
    out << r.pred_index << '\t' << text::format_double(r.score) << '\t' << r.type_id << '\t'
        << text::join_doubles(r.attention) << '\t' << text::join_doubles(r.mask) << '\n';
  }
}

void save_predictions(const std::vector<PredictionRecord>& records,
                      const std::filesystem::path& path) {
  auto out = open_out(path);
  save_predictions(records, out);
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<PredictionRecord> load_predictions(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || !line.starts_with(kPredHeader)) {
    throw ParseError(source, 1, "missing '#gge-predictions v1' header");
  }
  std::vector<PredictionRecord> out;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (text::trim(line).empty()) continue;
    const auto f = text::split(line, '\t');
    if (f.size() != 5) throw ParseError(source, n, "expected 5 tab-separated fields");
    PredictionRecord r;
    r.pred_index = parse_count(f[0], source, n, "pred_index");
    r.score = parse_real(f[1], source, n, "score");
    r.type_id = parse_count(f[2], source, n, "type_id");
    auto att = text::parse_doubles(f[3]);
    auto mask = text::parse_doubles(f[4]);
    if (!att) throw ParseError(source, n, "attention is not a list of numbers");
    if (!mask) throw ParseError(source, n, "mask is not a list of numbers");
    if (att->size() != mask->size()) throw ParseError(source, n, "attention and mask lengths differ");
    r.attention = std::move(*att);
    r.mask = std::move(*mask);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  return load_predictions(in, path.string());
}

void write_report_csv(const MetricsReport& r, std::ostream& out) {
  const auto real = [&](const char* k, double v) { out << k << ',' << text::format_double(v) << '\n'; };
  const auto count = [&](const char* k, std::size_t v) { out << k << ',' << v << '\n'; };
  out << "metric,value\n";
  real("accuracy", r.accuracy.overall);
  for (const auto& [t, acc] : r.accuracy.per_type) {
    out << "accuracy_type_" << t << ',' << text::format_double(acc) << '\n';
  }
  real("cgr", r.cgr);
  real("cgw", r.cgw);
  real("cgd", r.cgd);
  count("n_rp", r.n_rp);
  count("n_wp", r.n_wp);
  count("n_rg_rp", r.n_rg_rp);
  count("n_rg_wp", r.n_rg_wp);
  count("n_records", r.n_records);
  count("n_ungradable", r.n_ungradable);
  real("threshold", r.threshold);
  count("cap", r.cap);
  count("cgr_undefined", r.cgr_undefined ? 1 : 0);
  count("cgw_undefined", r.cgw_undefined ? 1 : 0);
}

MetricsReport read_report_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || text::trim(line) != "metric,value") {
    throw ParseError(source, 1, "missing 'metric,value' header");
  }
  MetricsReport r;
  std::map<std::string, bool> seen;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (text::trim(line).empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(source, n, "expected metric,value");
    const std::string key(text::trim(std::string_view(line).substr(0, comma)));
    const std::string_view val = std::string_view(line).substr(comma + 1);
    if (seen[key]) throw ParseError(source, n, "duplicate metric '" + key + "'");
    seen[key] = true;
    const auto real = [&] { return parse_real(val, source, n, key.c_str()); };
    const auto count = [&] { return parse_count(val, source, n, key.c_str()); };
    const auto flag = [&] {
      const auto v = count();
      if (v > 1) throw ParseError(source, n, key + " must be 0 or 1");
      return v == 1;
    };
    if (key == "accuracy") r.accuracy.overall = real();
    else if (key.starts_with("accuracy_type_")) {
      const auto t = parse_count(std::string_view(key).substr(14), source, n, "type id");
      r.accuracy.per_type[t] = real();
    } else if (key == "cgr") r.cgr = real();
    else if (key == "cgw") r.cgw = real();
    else if (key == "cgd") r.cgd = real();
    else if (key == "n_rp") r.n_rp = count();
    else if (key == "n_wp") r.n_wp = count();
    else if (key == "n_rg_rp") r.n_rg_rp = count();
    else if (key == "n_rg_wp") r.n_rg_wp = count();
    else if (key == "n_records") r.n_records = count();
    else if (key == "n_ungradable") r.n_ungradable = count();
    else if (key == "threshold") r.threshold = real();
    else if (key == "cap") r.cap = count();
    else if (key == "cgr_undefined") r.cgr_undefined = flag();
    else if (key == "cgw_undefined") r.cgw_undefined = flag();
    else throw ParseError(source, n, "unknown metric '" + key + "'");
  }
  for (const char* k : {"accuracy", "cgr", "cgw", "cgd", "threshold", "cap"}) {
    if (!seen[k]) throw ParseError(source, n, std::string("report lacks '") + k + "'");
  }
  return r;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "threshold,cap,cgr,cgw,cgd\n";
  for (const auto& r : rows) {
    out << text::format_double(r.threshold) << ',' << r.cap << ',' << text::format_double(r.cgr)
        << ',' << text::format_double(r.cgw) << ',' << text::format_double(r.cgd) << '\n';
  }
}

std::vector<SweepRow> read_sweep_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || text::trim(line) != "threshold,cap,cgr,cgw,cgd") {
    throw ParseError(source, 1, "missing sweep header");
  }
  std::vector<SweepRow> rows;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (text::trim(line).empty()) continue;
    const auto f = text::split(line, ',');
    if (f.size() != 5) throw ParseError(source, n, "expected 5 comma-separated fields");
    rows.push_back({parse_real(f[0], source, n, "threshold"), parse_count(f[1], source, n, "cap"),
                    parse_real(f[2], source, n, "cgr"), parse_real(f[3], source, n, "cgw"),
                    parse_real(f[4], source, n, "cgd")});
  }
  return rows;
}

std::string report_table(const MetricsReport& r) {
  const auto pct = [](double v) { return text::format_fixed(100.0 * v, 2); };
  std::vector<std::vector<std::string>> rows{
      {"metric", "value"},
      {"accuracy", pct(r.accuracy.overall)},
  };
  for (const auto& [t, acc] : r.accuracy.per_type) {
    rows.push_back({"  type " + std::to_string(t), pct(acc)});
  }
  rows.push_back({"CGR", text::format_fixed(r.cgr, 2) + (r.cgr_undefined ? " (no right predictions)" : "")});
  rows.push_back({"CGW", text::format_fixed(r.cgw, 2) + (r.cgw_undefined ? " (no wrong predictions)" : "")});
  rows.push_back({"CGD", text::format_fixed(r.cgd, 2)});
  rows.push_back({"threshold / cap", text::format_double(r.threshold) + " / " + std::to_string(r.cap)});
  rows.push_back({"right (grounded)", std::to_string(r.n_rp) + " (" + std::to_string(r.n_rg_rp) + ")"});
  rows.push_back({"wrong (grounded)", std::to_string(r.n_wp) + " (" + std::to_string(r.n_rg_wp) + ")"});
  rows.push_back({"records / ungradable",
                  std::to_string(r.n_records) + " / " + std::to_string(r.n_ungradable)});
  return text::aligned_table(rows);
}

std::string sweep_table(const std::vector<SweepRow>& rows) {
  std::vector<std::vector<std::string>> t{{"t", "cap", "CGR", "CGW", "CGD"}};
  for (const auto& r : rows) {
    t.push_back({text::format_double(r.threshold), std::to_string(r.cap),
                 text::format_fixed(r.cgr, 2), text::format_fixed(r.cgw, 2),
                 text::format_fixed(r.cgd, 2)});
  }
  return text::aligned_table(t);
}

}  // namespace gge::metrics
