#include "gge/cli/run_config.hpp"

#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "gge/error.hpp"
#include "gge/text.hpp"

namespace gge::cli {

namespace {

using ensemble::Schedule;
using ensemble::Variant;

enum class Type { Count, Real, Bool, Word, List, Path };

std::string_view type_name(Type t) {
  switch (t) {
    case Type::Count: return "non-negative integer";
    case Type::Real: return "real number";
    case Type::Bool: return "true/false";
    case Type::Word: return "name";
    case Type::List: return "comma-separated list";
    case Type::Path: return "path";
  }
  return "?";
}

// Parsed value of one key, already checked against its declared type.
struct Value {
  std::size_t count = 0;
  double real = 0.0;
  bool flag = false;
  std::string word;
  std::vector<std::string> list;
};

struct Key {
  std::string section;
  std::string name;
  Type type;
  std::function<void(RunConfig&, const Value&)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
  return out;
}

#define COUNT(sec, key, expr)                                                          \
  Key{sec, #key, Type::Count, [](RunConfig& c, const Value& v) { expr = v.count; },  \
      [](const RunConfig& c) { return std::to_string(expr); }}
#define REAL(sec, key, expr)                                                          \
  Key{sec, #key, Type::Real, [](RunConfig& c, const Value& v) { expr = v.real; },   \
      [](const RunConfig& c) { return text::format_double(expr); }}
#define FLAG(sec, key, expr)                                                          \
  Key{sec, #key, Type::Bool, [](RunConfig& c, const Value& v) { expr = v.flag; },   \
      [](const RunConfig& c) { return fmt_bool(expr); }}

const std::vector<Key>& schema() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k{
        COUNT("generator", classes, c.generator.classes),
        COUNT("generator", types, c.generator.types),
        COUNT("generator", regions, c.generator.regions),
        COUNT("generator", evidence_dim, c.generator.evidence_dim),
        COUNT("generator", context_dim, c.generator.context_dim),
        COUNT("generator", n_train, c.generator.n_train),
        COUNT("generator", n_test, c.generator.n_test),
        REAL("generator", head_mass, c.generator.head_mass),
        REAL("generator", shortcut_rate, c.generator.shortcut_rate),
        REAL("generator", noise_sigma, c.generator.noise_sigma),
        FLAG("generator", soft_labels, c.generator.soft_labels),
        COUNT("generator", seed, c.generator.seed),
        COUNT("model", hidden, c.hidden),
        Key{"training", "variant", Type::Word,
            [](RunConfig& c, const Value& v) { c.training.variant = ensemble::parse_variant(v.word); },
            [](const RunConfig& c) { return std::string(ensemble::variant_name(c.training.variant)); }},
        Key{"training", "schedule", Type::Word,
            [](RunConfig& c, const Value& v) { c.training.schedule = ensemble::parse_schedule(v.word); },
            [](const RunConfig& c) { return std::string(ensemble::schedule_name(c.training.schedule)); }},
        Key{"training", "loss_family", Type::Word,
            [](RunConfig& c, const Value& v) {
              c.training.loss_family = ensemble::parse_loss_family(v.word);
            },
            [](const RunConfig& c) { return std::string(losses::family_name(c.training.loss_family)); }},
        COUNT("training", epochs, c.training.epochs),
        COUNT("training", batch_size, c.training.batch_size),
        REAL("training", lr, c.training.lr),
        REAL("training", beta1, c.training.beta1),
        REAL("training", beta2, c.training.beta2),
        COUNT("training", seed, c.training.seed),
        COUNT("training", inverse_supervision_n, c.training.inverse_supervision_n),
        FLAG("training", vision_only, c.training.vision_only),
        REAL("evaluation", threshold, c.evaluation.threshold),
        COUNT("evaluation", cap, c.evaluation.cap),
        FLAG("evaluation", invert_grounding, c.evaluation.invert_grounding),
        FLAG("evaluation", strict, c.evaluation.strict),
        COUNT("ablation", seeds, c.ablation.seeds),
        COUNT("ablation", jobs, c.ablation.jobs),
        Key{"ablation", "runs", Type::List,
            [](RunConfig& c, const Value& v) {
              for (const auto& r : v.list) parse_ablation_run(r);
              c.ablation.runs = v.list;
            },
            [](const RunConfig& c) { return join(c.ablation.runs); }},
        Key{"paths", "data_dir", Type::Path,
            [](RunConfig& c, const Value& v) { c.paths.data_dir = v.word; },
            [](const RunConfig& c) { return c.paths.data_dir.string(); }},
        Key{"paths", "run_dir", Type::Path,
            [](RunConfig& c, const Value& v) { c.paths.run_dir = v.word; },
            [](const RunConfig& c) { return c.paths.run_dir.string(); }},
    };
    return k;
  }();
  return keys;
}

#undef COUNT
#undef REAL
#undef FLAG

// [model] may restate the generator's shapes; they are checked, not stored.
const std::set<std::string> kModelEchoes{"regions", "evidence_dim", "context_dim", "classes"};

std::size_t generator_dim(const RunConfig& c, const std::string& key) {
  if (key == "regions") return c.generator.regions;
  if (key == "evidence_dim") return c.generator.evidence_dim;
  if (key == "context_dim") return c.generator.context_dim;
  return c.generator.classes;
}

Value parse_value(Type type, std::string_view raw, const std::string& source, std::size_t line,
                  const std::string& key) {
  Value v;
  const auto bad = [&] {
    throw ParseError(source, line,
                     "'" + key + "' expects a " + std::string(type_name(type)) + ", got '" +
                         std::string(raw) + "'");
  };
  switch (type) {
    case Type::Count: {
      auto n = text::parse_int(raw);
      if (!n || *n < 0) bad();
      v.count = static_cast<std::size_t>(*n);
      break;
    }
    case Type::Real: {
      auto d = text::parse_double(raw);
      if (!d) bad();
      v.real = *d;
      break;
    }
    case Type::Bool:
      if (raw == "true") v.flag = true;
      else if (raw == "false") v.flag = false;
      else bad();
      break;
    case Type::Word:
    case Type::Path:
      if (raw.empty()) bad();
      v.word = std::string(raw);
      break;
    case Type::List:
      for (auto item : text::split(raw, ',')) {
        item = text::trim(item);
        if (item.empty()) bad();
        v.list.emplace_back(item);
      }
      break;
  }
  return v;
}

}  // namespace

AblationRun parse_ablation_run(std::string_view label) {
  AblationRun r;
  r.label = std::string(label);
  std::string_view name = label;
  const auto strip = [&name](std::string_view suffix) {
    if (name.size() > suffix.size() && name.ends_with(suffix)) {
      name.remove_suffix(suffix.size());
      return true;
    }
    return false;
  };
  if (strip("-vo")) r.vision_only = true;
  if (strip("-tog")) r.schedule = Schedule::Tog;
  else strip("-iter");
  r.variant = ensemble::parse_variant(name);
  if (r.schedule == Schedule::Tog && !ensemble::uses_schedule(r.variant)) {
    throw ConfigError("run '" + r.label + "': variant has no tog schedule");
  }
  return r;
}

const std::vector<std::string>& default_ablation_runs() {
  static const std::vector<std::string> runs{
      "baseline",    "sum-dq",      "rubi",   "gge-d",       "gge-q-iter",          "gge-q-tog",
      "gge-dq-iter", "gge-dq-tog",  "gge-sf", "vision-only", "inverse-supervision",
  };
  return runs;
}

void RunConfig::validate() const {
  generator.validate();
  models::ArchitectureSpec arch = architecture();
  arch.validate();
  training.validate();
  if (!(evaluation.threshold > 0.0 && evaluation.threshold < 1.0)) {
    throw ConfigError("evaluation.threshold must lie in (0, 1)");
  }
  if (evaluation.cap < 1) throw ConfigError("evaluation.cap must be >= 1");
  if (ablation.seeds < 1) throw ConfigError("ablation.seeds must be >= 1");
  if (ablation.jobs < 1) throw ConfigError("ablation.jobs must be >= 1");
  if (ablation.runs.empty()) throw ConfigError("ablation.runs is empty");
  for (const auto& r : ablation.runs) parse_ablation_run(r);
}

RunConfig parse_run_config(std::istream& in, const std::string& source) {
  RunConfig c;
  std::map<std::pair<std::string, std::string>, const Key*> index;
  std::set<std::string> sections;
  for (const auto& k : schema()) {
    index[{k.section, k.name}] = &k;
    sections.insert(k.section);
  }
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<std::pair<std::string, std::size_t>> echoes;  // key, value
  std::string section;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = raw;
    if (auto hash = s.find_first_of("#;"); hash != std::string_view::npos) s = s.substr(0, hash);
    s = text::trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError(source, line, "unterminated section header");
      section = std::string(text::trim(s.substr(1, s.size() - 2)));
      if (!sections.contains(section)) {
        throw ParseError(source, line, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, line, "expected key = value");
    const std::string key(text::trim(s.substr(0, eq)));
    const std::string_view value = text::trim(s.substr(eq + 1));
    if (section.empty()) throw ParseError(source, line, "key '" + key + "' before any section");
    if (!seen.insert({section, key}).second) {
      throw ParseError(source, line, "duplicate key '" + key + "' in [" + section + "]");
    }
    if (section == "model" && kModelEchoes.contains(key)) {
      echoes.emplace_back(key, parse_value(Type::Count, value, source, line, key).count);
      continue;
    }
    auto it = index.find({section, key});
    if (it == index.end()) {
      throw ParseError(source, line, "unknown key '" + key + "' in [" + section + "]");
    }
    const Value v = parse_value(it->second->type, value, source, line, key);
    try {
      it->second->set(c, v);
    } catch (const ConfigError& e) {
      throw ParseError(source, line, e.what());
    }
  }
  for (const auto& [key, v] : echoes) {
    if (generator_dim(c, key) != v) {
      throw ConfigError("[model] " + key + " = " + std::to_string(v) + " disagrees with [generator] " +
                        key + " = " + std::to_string(generator_dim(c, key)));
    }
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  return parse_run_config(in, path.string());
}

std::string render_run_config(const RunConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& k : schema()) {
    if (k.section != section) {
      if (!section.empty()) out << '\n';
      section = k.section;
      out << '[' << section << "]\n";
    }
    out << k.name << " = " << k.get(config) << '\n';
  }
  return out.str();
}

}  // namespace gge::cli
