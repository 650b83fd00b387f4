// Acceptance driver: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <json.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gge/benchmark/dataset_io.hpp"
#include "gge/benchmark/generator.hpp"
#include "gge/cli/commands.hpp"
#include "gge/cli/run_config.hpp"
#include "gge/ensemble/distribution_bias.hpp"
#include "gge/ensemble/predict.hpp"
#include "gge/ensemble/trainer.hpp"
#include "gge/losses/losses.hpp"
#include "gge/metrics/metrics.hpp"
#include "gge/models/base_model.hpp"
#include "gge/models/branches.hpp"
#include "gge/nn/grad_check.hpp"
#include "gge/nn/rng.hpp"

namespace {

using namespace gge;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using models::Network;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

nlohmann::json fixture(const std::string& name) {
  std::ifstream in(std::string(GGE_FIXTURE_DIR) + "/" + name);
  if (!in) throw std::runtime_error("missing fixture " + name);
  return nlohmann::json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

models::Instance random_instance(const models::ArchitectureSpec& a, std::uint64_t seed) {
  nn::Rng r(seed);
  models::Instance i;
  i.evidence = nn::Matrix(a.regions, a.evidence_dim);
  for (double& v : i.evidence.values()) v = r.normal();
  i.context.resize(a.context_dim);
  for (double& v : i.context) v = r.normal();
  i.label.assign(a.classes, 0.0);
  i.label[r.below(a.classes)] = 1.0;
  i.label[r.below(a.classes)] = 0.6;
  i.grounding_mask.assign(a.regions, 0.0);
  i.grounding_mask[0] = 1.0;
  return i;
}

// 1. Analytic gradients of every network vs central differences.
Outcome gradient_oracle() {
  const auto t0 = Clock::now();
  const models::ArchitectureSpec a{4, 5, 6, 8, 7};
  double worst = 0.0;
  std::size_t skipped = 0, checks = 0, unexplained = 0, kinked_points = 0;
  for (Network net : {Network::Attention, Network::EvidenceOnly, Network::ContextBranch,
                      Network::SelfHead, Network::RubiBranch}) {
    for (auto family : {losses::LossFamily::Bce, losses::LossFamily::SoftmaxCe}) {
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto inst = random_instance(a, 500 + seed);
        auto p = models::init_network(net, a, seed);
        auto g = p.zeros_like();
        std::function<double(const nn::Params&)> loss;
        nn::KinkPattern pattern;
        std::size_t kinks = 0;
        nn::Vector repr(a.hidden);
        nn::Rng rr(seed + 31);
        for (double& v : repr) v = rr.uniform();
        nn::Vector fixed_logits(a.classes);
        for (double& v : fixed_logits) v = rr.uniform(-2, 2);

        switch (net) {
          case Network::Attention:
          case Network::EvidenceOnly: {
            const auto kind =
                net == Network::Attention ? models::BaseKind::Attention : models::BaseKind::EvidenceOnly;
            const auto f = models::forward_base_kind(kind, p, a, inst);
            models::backward_base(p, f, losses::loss_grad_wrt_logits(family, f.logits, inst.label), g);
            loss = [&, kind](const nn::Params& q) {
              return losses::loss(family, models::forward_base_kind(kind, q, a, inst).logits, inst.label);
            };
            pattern = [&, kind](const nn::Params& q) {
              return models::relu_pattern(models::forward_base_kind(kind, q, a, inst).cache);
            };
            kinks = models::exact_kinks(f.cache);
            break;
          }
          case Network::ContextBranch: {
            const auto f = models::forward_context_branch(p, a, inst);
            models::backward_context_branch(p, f, losses::loss_grad_wrt_logits(family, f.logits, inst.label), g);
            loss = [&](const nn::Params& q) {
              return losses::loss(family, models::forward_context_branch(q, a, inst).logits, inst.label);
            };
            pattern = [&](const nn::Params& q) {
              return models::relu_pattern(models::forward_context_branch(q, a, inst).cache);
            };
            kinks = models::exact_kinks(f.cache);
            break;
          }
          case Network::SelfHead: {
            const auto f = models::forward_self_head(p, repr);
            models::backward_self_head(p, f, losses::loss_grad_wrt_logits(family, f.logits, inst.label), g);
            loss = [&](const nn::Params& q) {
              return losses::loss(family, models::forward_self_head(q, repr).logits, inst.label);
            };
            break;
          }
          case Network::RubiBranch: {
            const auto total = [&](const models::RubiForward& f) {
              nn::Vector masked(a.classes);
              for (std::size_t k = 0; k < a.classes; ++k) masked[k] = fixed_logits[k] * f.mask[k];
              return losses::loss(family, masked, inst.label) + losses::loss(family, f.logits, inst.label);
            };
            const auto f = models::forward_rubi_branch(p, a, inst);
            nn::Vector masked(a.classes);
            for (std::size_t k = 0; k < a.classes; ++k) masked[k] = fixed_logits[k] * f.mask[k];
            const auto gm = losses::loss_grad_wrt_logits(family, masked, inst.label);
            nn::Vector gg(a.classes);
            for (std::size_t k = 0; k < a.classes; ++k) {
              gg[k] = gm[k] * fixed_logits[k] * f.mask[k] * (1 - f.mask[k]);
            }
            models::backward_rubi_branch(p, f, gg, losses::loss_grad_wrt_logits(family, f.logits, inst.label), g);
            loss = [&, total](const nn::Params& q) { return total(models::forward_rubi_branch(q, a, inst)); };
            pattern = [&](const nn::Params& q) {
              return models::relu_pattern(models::forward_rubi_branch(q, a, inst).cache);
            };
            kinks = models::exact_kinks(f.cache);
            break;
          }
        }
        const auto r = nn::check_gradients(loss, p, g, 1e-4, pattern);
        worst = std::max(worst, r.max_relative_error);
        // A skipped coordinate is acceptable only where the unperturbed point
        // has a pre-activation exactly at 0: there is no derivative to match.
        skipped += r.skipped;
        kinked_points += kinks > 0;
        unexplained += kinks == 0 && r.skipped > 0;
        ++checks;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-4 && unexplained == 0 && secs < 10.0,
          fmt("%zu checks, max rel err %.2e, %zu coords excluded at %zu non-differentiable points, "
              "%zu unexplained skips, %.2f s",
              checks, worst, skipped, kinked_points, unexplained, secs)};
}

// 2. Pseudo-labels against the high-precision oracle, plus monotonicity in H.
Outcome pseudo_label_oracle() {
  const auto fx = fixture("scalars.json");
  double bce_err = 0.0, ce_err = 0.0;
  std::map<double, std::vector<std::pair<double, double>>> by_y;
  for (const auto& row : fx["bce_grid"]) {
    const double y = row["y"].get<double>(), h = row["h"].get<double>();
    const double got = losses::pseudo_label_bce(std::vector<double>{y}, std::vector<double>{h})[0];
    bce_err = std::max(bce_err, std::abs(got - row["pl"].get<double>()));
    by_y[y].emplace_back(h, got);
  }
  for (const auto& c : fx["ce_cases"]) {
    const auto label = c["label"].get<std::vector<double>>();
    const auto probs = c["probs"].get<std::vector<double>>();
    const auto want = c["pl"].get<std::vector<double>>();
    const auto got = losses::pseudo_label_ce(label, probs);
    for (std::size_t i = 0; i < got.size(); ++i) ce_err = std::max(ce_err, std::abs(got[i] - want[i]));
  }
  // Larger H means the ensemble already explains more: target never grows.
  std::size_t violations = 0;
  for (auto& [y, pts] : by_y) {
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 1; i < pts.size(); ++i) violations += pts[i].second > pts[i - 1].second + 1e-12;
  }
  return {bce_err <= 1e-9 && ce_err <= 1e-12 && violations == 0 && by_y.size() == 5,
          fmt("bce grid %zu points err %.1e, ce %zu cases err %.1e, %zu monotonicity violations",
              fx["bce_grid"].size(), bce_err, fx["ce_cases"].size(), ce_err, violations)};
}

// 3. Distribution bias vs a separate per-(type, answer) recount.
Outcome distribution_bias_exactness() {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    nn::Rng rng(nn::derive_seed(s, "bias-acceptance"));
    benchmark::Dataset d;
    d.config.types = 1 + rng.below(6);
    d.config.classes = d.config.types * (2 + rng.below(5));
    const std::size_t n = d.config.types + rng.below(1000 - d.config.types + 1);
    for (std::size_t i = 0; i < n; ++i) {
      models::Instance inst;
      inst.type_id = i < d.config.types ? i : rng.below(d.config.types);
      inst.label.assign(d.config.classes, 0.0);
      const std::size_t hits = 1 + rng.below(3);
      for (std::size_t h = 0; h < hits; ++h) {
        inst.label[rng.below(d.config.classes)] = std::array{0.3, 0.6, 0.9, 1.0}[rng.below(4)];
      }
      d.instances.push_back(std::move(inst));
    }
    const auto table = ensemble::fit_distribution_bias(d).table;
    for (std::size_t t = 0; t < d.config.types; ++t) {
      double total = 0.0;
      for (const auto& inst : d.instances) {
        if (inst.type_id != t) continue;
        for (double v : inst.label) total += v;
      }
      for (std::size_t a = 0; a < d.config.classes; ++a) {
        double mass = 0.0;
        for (const auto& inst : d.instances) {
          if (inst.type_id == t) mass += inst.label[a];
        }
        worst = std::max(worst, std::abs(table(t, a) - mass / total));
      }
    }
  }
  return {worst <= 1e-12, fmt("100 datasets, max abs err %.1e", worst)};
}

// 4. CGR/CGW/CGD against the brute-force fixture.
Outcome metrics_oracle() {
  const auto fx = fixture("metrics_sets.json");
  std::size_t reports = 0, mismatches = 0, identity = 0, cap_bad = 0;
  for (const auto& set : fx["sets"]) {
    std::vector<metrics::PredictionRecord> records;
    for (const auto& r : set["records"]) {
      metrics::PredictionRecord p;
      p.pred_index = r["pred_index"].get<std::size_t>();
      p.score = r["score"].get<double>();
      p.type_id = r["type_id"].get<std::size_t>();
      p.attention = r["attention"].get<std::vector<double>>();
      p.mask = r["mask"].get<std::vector<double>>();
      records.push_back(std::move(p));
    }
    for (const auto& e : set["expected"]) {
      const double t = e["threshold"].get<double>();
      const auto cap = e["cap"].get<std::size_t>();
      cap_bad += metrics::paired_cap(t) != cap;
      const auto mode = e["strict"].get<bool>() ? metrics::GroundingMode::All : metrics::GroundingMode::Any;
      const auto rep = metrics::cgr_cgw_cgd(records, t, cap, mode);
      mismatches += rep.cgr != e["cgr"].get<double>() || rep.cgw != e["cgw"].get<double>() ||
                    rep.cgd != e["cgd"].get<double>() || rep.n_rg_rp != e["n_rg_rp"].get<std::size_t>() ||
                    rep.n_rg_wp != e["n_rg_wp"].get<std::size_t>();
      identity += rep.cgd != rep.cgr - rep.cgw;
      ++reports;
    }
    for (const auto& row : metrics::sweep_thresholds(records, metrics::kSweepThresholds)) {
      cap_bad += row.cap != metrics::paired_cap(row.threshold);
      identity += row.cgd != row.cgr - row.cgw;
    }
  }
  const bool pairing = metrics::paired_cap(0.1) == 9 && metrics::paired_cap(0.2) == 4 &&
                       metrics::paired_cap(0.3) == 3 && metrics::paired_cap(0.4) == 2;
  return {fx["sets"].size() == 50 && mismatches == 0 && identity == 0 && cap_bad == 0 && pairing,
          fmt("%zu sets, %zu reports, %zu mismatches, %zu identity failures, cap pairing %s",
              fx["sets"].size(), reports, mismatches, identity, pairing && cap_bad == 0 ? "ok" : "BROKEN")};
}

struct Means {
  double ood = 0.0, id = 0.0, cgd = 0.0, cgd_inverted = 0.0;
};

std::map<std::string, Means> means(const std::vector<cli::AblationCell>& cells) {
  std::map<std::string, Means> out;
  std::map<std::string, std::size_t> n;
  for (const auto& c : cells) {
    auto& m = out[c.run];
    m.ood += c.ood_accuracy;
    m.id += c.id_accuracy;
    m.cgd += c.ood_cgd;
    m.cgd_inverted += c.ood_cgd_inverted;
    ++n[c.run];
  }
  for (auto& [run, m] : out) {
    const double k = static_cast<double>(n[run]);
    m.ood /= k, m.id /= k, m.cgd /= k, m.cgd_inverted /= k;
  }
  return out;
}

Outcome ordering(const std::map<std::string, Means>& m, const std::string& dq, double secs,
                 bool check_time) {
  const auto& b = m.at("baseline");
  const auto& q = m.at("gge-q");
  const auto& d = m.at(dq);
  const bool order = b.ood < q.ood && q.ood < d.ood;
  const bool gap = d.ood - b.ood >= 0.10;
  const bool cgd = d.cgd > b.cgd;
  const bool time_ok = !check_time || secs < 300.0;
  std::string detail = fmt("OOD baseline %.2f%%, gge-q %.2f%%, %s %.2f%% (gap %+.2f pts); CGD %.2f vs %.2f",
                           100 * b.ood, 100 * q.ood, dq.c_str(), 100 * d.ood, 100 * (d.ood - b.ood),
                           d.cgd, b.cgd);
  if (check_time) detail += fmt("; %.1f s", secs);
  if (!order) detail += " [ordering violated]";
  if (!gap) detail += " [gap < 10 pts]";
  if (!cgd) detail += " [CGD not above baseline]";
  if (!time_ok) detail += " [over 5 min]";
  return {order && gap && cgd && time_ok, detail};
}

// 6c on one trained baseline: accuracy must be bit-identical, CGD must move.
Outcome inverse_grounding(const cli::RunConfig& config) {
  const auto splits = benchmark::generate(config.generator);
  auto tc = config.training;
  const auto arch = config.architecture();
  const auto rec = ensemble::train(tc, arch, splits.train);
  const auto preds = ensemble::predict(rec.params.at("base"), tc.base_kind(), arch, splits.test_ood);
  const auto flipped = ensemble::predict(rec.params.at("base"), tc.base_kind(), arch,
                                         benchmark::invert_grounding(splits.test_ood));
  const auto a = metrics::cgr_cgw_cgd(preds, 0.2, 4);
  const auto b = metrics::cgr_cgw_cgd(flipped, 0.2, 4);
  bool same_predictions = preds.size() == flipped.size();
  for (std::size_t i = 0; same_predictions && i < preds.size(); ++i) {
    same_predictions = preds[i].pred_index == flipped[i].pred_index && preds[i].score == flipped[i].score &&
                       preds[i].attention == flipped[i].attention;
  }
  const bool same_acc = a.accuracy == b.accuracy;
  const double delta = std::abs(a.cgd - b.cgd);
  return {same_predictions && same_acc && delta >= 10.0,
          fmt("accuracy %.4f vs %.4f (%s), CGD %.2f -> %.2f (|delta| %.2f, need >= 10)", a.accuracy.overall,
              b.accuracy.overall, same_acc ? "identical" : "DIFFERENT", a.cgd, b.cgd, delta)};
}

// 7. Full pipeline twice in separate directories; every artifact but the
// wall-time file must match byte for byte.
Outcome determinism(cli::RunConfig config) {
  config.training.variant = ensemble::Variant::GgeDQ;
  config.training.schedule = ensemble::Schedule::Tog;
  const auto root = fs::temp_directory_path() / "gge_acceptance_determinism";
  fs::remove_all(root);
  std::vector<std::map<std::string, std::string>> outputs;
  for (const char* rep : {"a", "b"}) {
    const auto dir = root / rep;
    cli::cmd_gen_data(config, dir / "data");
    cli::cmd_train(config, dir / "data", dir / "run");
    const auto records =
        cli::run_predictions(dir / "run", benchmark::split_path(dir / "data", benchmark::Split::TestOod));
    cli::cmd_eval(records, {}, dir / "run" / "report");
    cli::cmd_sweep(records, {}, dir / "run" / "sweep");
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
      if (!e.is_regular_file() || e.path().filename() == "run_info.txt") continue;
      files[fs::relative(e.path(), dir).string()] = slurp(e.path());
    }
    outputs.push_back(std::move(files));
  }
  fs::remove_all(root);
  const bool same = outputs[0] == outputs[1] && !outputs[0].empty();
  return {same, fmt("%zu artifacts compared, %s", outputs[0].size(), same ? "bit-identical" : "DIFFER")};
}

}  // namespace

int main() {
  bool all = true;
  const auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << "  " << name << ": " << o.detail
              << std::endl;
  };

  report(1, "gradient oracle", gradient_oracle);
  report(2, "pseudo-label oracles", pseudo_label_oracle);
  report(3, "distribution-bias exactness", distribution_bias_exactness);
  report(4, "metrics oracle", metrics_oracle);

  const cli::RunConfig config;  // default benchmark and training settings
  std::vector<cli::AblationCell> main_cells;
  double main_secs = 0.0;
  try {
    const auto t0 = Clock::now();
    main_cells = cli::run_ablation(config, {"baseline", "gge-q", "gge-dq-iter"}, 5, 1);
    main_secs = seconds_since(t0);
  } catch (const std::exception& e) {
    std::cout << "ablation runs failed: " << e.what() << std::endl;
  }
  std::vector<cli::AblationCell> extra_cells;
  try {
    extra_cells = cli::run_ablation(config, {"gge-dq-tog", "vision-only", "gge-d-vo", "inverse-supervision"}, 5, 1);
  } catch (const std::exception& e) {
    std::cout << "ablation runs failed: " << e.what() << std::endl;
  }
  auto cells = main_cells;
  cells.insert(cells.end(), extra_cells.begin(), extra_cells.end());
  const auto m = means(cells);

  report(5, "ordering reproduction", [&] { return ordering(m, "gge-dq-iter", main_secs, true); });
  report(6, "control experiments", [&] {
    const auto& b = m.at("baseline");
    const auto& vo = m.at("vision-only");
    const auto& dvo = m.at("gge-d-vo");
    const auto& is = m.at("inverse-supervision");
    const bool a = dvo.ood > vo.ood;
    const bool b_ood = is.ood > b.ood;
    const bool b_id = is.id < b.id;
    const auto c = inverse_grounding(config);
    std::string detail =
        fmt("(a) gge-d-vo %.2f%% vs vision-only %.2f%% %s; (b) inverse-sup OOD %.2f%% vs %.2f%% %s, "
            "ID %.2f%% vs %.2f%% %s; (c) ",
            100 * dvo.ood, 100 * vo.ood, a ? "ok" : "FAIL", 100 * is.ood, 100 * b.ood, b_ood ? "ok" : "FAIL",
            100 * is.id, 100 * b.id, b_id ? "ok" : "FAIL");
    detail += c.detail + (c.pass ? " ok" : " FAIL");
    return Outcome{a && b_ood && b_id && c.pass, detail};
  });
  report(7, "determinism", [&] { return determinism(config); });
  report(8, "schedule parity", [&] {
    const auto iter = ordering(m, "gge-dq-iter", 0.0, false);
    const auto tog = ordering(m, "gge-dq-tog", 0.0, false);
    return Outcome{iter.pass && tog.pass, "iter: " + iter.detail + " | tog: " + tog.detail};
  });

  std::cout << (all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL") << std::endl;
  return all ? 0 : 1;
}
