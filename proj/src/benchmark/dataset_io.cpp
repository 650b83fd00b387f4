#include "gge/benchmark/dataset_io.hpp"

#include <fstream>
#include <map>

#include "gge/error.hpp"
#include "gge/text.hpp"

namespace gge::benchmark {

namespace {

constexpr std::string_view kMagic = "#gge-dataset";

std::map<std::string, std::string> header_fields(std::string_view line, const std::string& source) {
  std::map<std::string, std::string> kv;
  const auto tokens = text::split(line, ' ');
  if (tokens.size() < 2 || tokens[0] != kMagic || tokens[1] != "v1") {
    throw ParseError(source, 1, "missing '#gge-dataset v1' header");
  }
  for (std::size_t i = 2; i < tokens.size(); ++i) {
    if (tokens[i].empty()) continue;
    const auto eq = tokens[i].find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(source, 1, "header token '" + std::string(tokens[i]) + "' is not key=value");
    }
    kv.emplace(std::string(tokens[i].substr(0, eq)), std::string(tokens[i].substr(eq + 1)));
  }
  return kv;
}

GeneratorConfig config_from_header(const std::map<std::string, std::string>& kv,
                                   const std::string& source) {
  const auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(source, 1, "header lacks '" + key + "'");
    return it->second;
  };
  const auto count = [&](const std::string& key) {
    auto v = text::parse_int(get(key));
    if (!v || *v < 0) throw ParseError(source, 1, "header '" + key + "' is not a count");
    return static_cast<std::size_t>(*v);
  };
  const auto real = [&](const std::string& key) {
    auto v = text::parse_double(get(key));
    if (!v) throw ParseError(source, 1, "header '" + key + "' is not a number");
    return *v;
  };
  GeneratorConfig c;
  c.classes = count("classes");
  c.types = count("types");
  c.regions = count("regions");
  c.evidence_dim = count("evidence_dim");
  c.context_dim = count("context_dim");
  c.n_train = count("n_train");
  c.n_test = count("n_test");
  c.head_mass = real("head_mass");
  c.shortcut_rate = real("shortcut_rate");
  c.noise_sigma = real("noise_sigma");
  const auto& soft = get("soft_labels");
  if (soft != "true" && soft != "false") throw ParseError(source, 1, "soft_labels must be true/false");
  c.soft_labels = soft == "true";
  auto seed = text::parse_int(get("seed"));
  if (!seed) throw ParseError(source, 1, "header 'seed' is not an integer");
  c.seed = static_cast<std::uint64_t>(*seed);
  return c;
}

nn::Vector parse_vector(std::string_view field, std::size_t expected, const char* what,
                        const std::string& source, std::size_t line) {
  auto values = text::parse_doubles(field);
  if (!values) throw ParseError(source, line, std::string(what) + " has a non-numeric entry");
  if (values->size() != expected) {
    throw ParseError(source, line,
                     std::string(what) + " has " + std::to_string(values->size()) +
                         " values, expected " + std::to_string(expected));
  }
  return std::move(*values);
}

}  // namespace

void save_dataset(const Dataset& data, std::ostream& out) {
  out << kMagic << " v1 split=" << split_name(data.split) << " count=" << data.size()
      << " digest=" << data.config.digest() << ' ' << data.config.canonical() << '\n';
  for (const auto& inst : data.instances) {
    out << inst.type_id << '\t';
    bool any = false;
    for (std::size_t a = 0; a < inst.label.size(); ++a) {
      if (inst.label[a] == 0.0) continue;
      if (any) out << ' ';
      out << a << ':' << text::format_double(inst.label[a]);
      any = true;
    }
    if (!any) out << '-';
    const std::vector<double> ev(inst.evidence.values().begin(), inst.evidence.values().end());
    out << '\t' << text::join_doubles(ev) << '\t' << text::join_doubles(inst.context) << '\t'
        << text::join_doubles(inst.grounding_mask) << '\n';
  }
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset " + path.string());
  save_dataset(data, out);
  if (!out) throw IoError("failed writing dataset " + path.string());
}

Dataset load_dataset(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "empty file");
  const auto kv = header_fields(line, source);
  Dataset data;
  data.config = config_from_header(kv, source);
  {
    auto it = kv.find("split");
    if (it == kv.end()) throw ParseError(source, 1, "header lacks 'split'");
    try {
      data.split = parse_split(it->second);
    } catch (const ValidationError& e) {
      throw ParseError(source, 1, e.what());
    }
  }
  auto count_it = kv.find("count");
  if (count_it == kv.end()) throw ParseError(source, 1, "header lacks 'count'");
  const auto count = text::parse_int(count_it->second);
  if (!count || *count < 0) throw ParseError(source, 1, "header 'count' is not a count");
  auto digest_it = kv.find("digest");
  if (digest_it != kv.end() && digest_it->second != data.config.digest()) {
    throw ParseError(source, 1, "generator config digest mismatch");
  }

  const auto& c = data.config;
  std::size_t lineno = 1;
  data.instances.reserve(static_cast<std::size_t>(*count));
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) throw ParseError(source, lineno, "blank record");
    const auto fields = text::split(line, '\t');
    if (fields.size() != 5) {
      throw ParseError(source, lineno,
                       "expected 5 tab-separated fields, found " + std::to_string(fields.size()));
    }
    models::Instance inst;
    const auto type_id = text::parse_int(fields[0]);
    if (!type_id || *type_id < 0 || static_cast<std::size_t>(*type_id) >= c.types) {
      throw ParseError(source, lineno, "type_id '" + std::string(fields[0]) + "' is invalid");
    }
    inst.type_id = static_cast<std::size_t>(*type_id);

    inst.label.assign(c.classes, 0.0);
    if (fields[1] != "-") {
      for (auto pair : text::split(fields[1], ' ')) {
        if (pair.empty()) continue;
        const auto colon = pair.find(':');
        if (colon == std::string_view::npos) {
          throw ParseError(source, lineno, "label entry '" + std::string(pair) + "' is not index:score");
        }
        const auto idx = text::parse_int(pair.substr(0, colon));
        const auto score = text::parse_double(pair.substr(colon + 1));
        if (!idx || *idx < 0 || static_cast<std::size_t>(*idx) >= c.classes || !score ||
            !(*score >= 0.0 && *score <= 1.0)) {
          throw ParseError(source, lineno, "label entry '" + std::string(pair) + "' is invalid");
        }
        inst.label[static_cast<std::size_t>(*idx)] = *score;
      }
    }
    inst.evidence = nn::Matrix(c.regions, c.evidence_dim,
                               parse_vector(fields[2], c.regions * c.evidence_dim, "evidence",
                                            source, lineno));
    inst.context = parse_vector(fields[3], c.context_dim, "context", source, lineno);
    inst.grounding_mask = parse_vector(fields[4], c.regions, "mask", source, lineno);
    data.instances.push_back(std::move(inst));
  }
  if (data.instances.size() != static_cast<std::size_t>(*count)) {
    throw ParseError(source, lineno + 1,
                     "header declares " + std::to_string(*count) + " records, file ends after " +
                         std::to_string(data.instances.size()));
  }
  return data;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read dataset " + path.string());
  return load_dataset(in, path.string());
}

std::filesystem::path split_path(const std::filesystem::path& dir, Split split) {
  return dir / (std::string(split_name(split)) + ".tsv");
}

}  // namespace gge::benchmark
