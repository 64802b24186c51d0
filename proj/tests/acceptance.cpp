// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <ranges>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "xsema/analyze.hpp"
#include "xsema/bundle.hpp"
#include "xsema/encoder.hpp"
#include "xsema/eval.hpp"
#include "xsema/eventtext.hpp"
#include "xsema/motif.hpp"
#include "xsema/synth.hpp"

using namespace xsema;

namespace {

// Tolerances and budgets.
constexpr double kMotifBudgetSeconds = 10.0;
constexpr double kEndToEndBudgetSeconds = 60.0;
constexpr double kGradientTolerance = 1e-4;
constexpr double kHandCaseTolerance = 1e-12;
constexpr double kGeneralityFloor = 0.95;
constexpr double kGeneralizabilityFloor = 0.90;
constexpr std::size_t kTokenBudget = 256;
constexpr std::size_t kTopTerms = 5;

constexpr std::uint64_t kDataSeed = 1;
constexpr std::uint64_t kExperimentSeed = 7;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

const Dataset& synthetic() {
  static const Dataset ds = [] {
    SynthConfig cfg;
    cfg.n_per_class = 400;
    cfg.noise_rate = 0.05;
    cfg.seed = kDataSeed;
    return generate_synthetic(cfg);
  }();
  return ds;
}

ExperimentConfig experiment(FeatureMode mode, SplitMode split) {
  ExperimentConfig cfg;
  cfg.pipeline.mode = mode;
  cfg.split.mode = split;
  cfg.seed = kExperimentSeed;
  return cfg;
}

Outcome motif_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  int graphs = 0;
  for (double p : {0.1, 0.3, 0.6}) {
    for (int rep = 0; rep < 70; ++rep) {
      const int n = 1 + static_cast<int>(rng() % 12);
      std::bernoulli_distribution coin(p);
      std::vector<AssetTransferGraph::Edge> edges;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (i != j && coin(rng)) edges.emplace_back(i, j);
        }
      }
      const auto g = AssetTransferGraph::from_edges(static_cast<std::size_t>(n), edges);
      if (census_fast(g) != census_bruteforce(g)) return {false, "mismatch on random graph " + std::to_string(graphs)};
      ++graphs;
    }
  }

  struct Hand {
    const char* name;
    std::size_t n;
    std::vector<AssetTransferGraph::Edge> edges;
    std::vector<std::pair<int, std::int64_t>> expect;
  };
  const std::vector<Hand> hand = {
      {"empty", 0, {}, {}},
      {"single edge", 2, {{0, 1}}, {{0, 1}}},
      {"reciprocal pair", 2, {{0, 1}, {1, 0}}, {{1, 1}}},
      {"3-cycle", 3, {{0, 1}, {1, 2}, {2, 0}}, {{0, 3}, {2, 1}}},
      {"bi-fan", 4, {{0, 2}, {0, 3}, {1, 2}, {1, 3}}, {{0, 4}, {9, 2}, {11, 2}, {15, 1}}},
  };
  for (const auto& h : hand) {
    const auto g = AssetTransferGraph::from_edges(h.n, h.edges);
    MotifVector want = MotifVector::Zero();
    for (auto [slot, count] : h.expect) want(slot) = count;
    const auto fast = census_fast(g);
    if (fast != census_bruteforce(g) || fast != want) return {false, std::string("hand case ") + h.name};
  }
  const double t = seconds_since(t0);
  return {t < kMotifBudgetSeconds,
          std::to_string(graphs) + " random graphs + 5 hand cases agree in " + fmt(t) + " s"};
}

Outcome metrics_identity() {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = 1 + rng() % 64;
    std::vector<TxClass> t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = kAllClasses[rng() % 3];
      p[i] = kAllClasses[rng() % 3];
    }
    const auto m = compute_metrics(t, p);
    if (m.micro_precision != m.accuracy || m.micro_recall != m.accuracy) {
      return {false, "identity broken on vector " + std::to_string(k)};
    }
  }
  using enum TxClass;
  const std::vector<TxClass> t{NT, DT, WT, NT}, p{NT, DT, DT, NT};
  const auto m = compute_metrics(t, p);
  const bool hand = std::abs(m.accuracy - 0.75) <= kHandCaseTolerance &&
                    std::abs(m.f1_macro - 5.0 / 9.0) <= kHandCaseTolerance;
  return {hand, "1000 vectors exact; hand case accuracy " + fmt(m.accuracy) + ", macro-F1 " + fmt(m.f1_macro)};
}

Outcome gradient() {
  double worst = 0.0;
  for (std::uint64_t b = 0; b < 3; ++b) {
    std::mt19937_64 rng(100 + b);
    std::normal_distribution<double> d;
    const int rows = 8;
    Eigen::MatrixXd x(rows, 64);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = d(rng);
    std::vector<TxClass> y;
    for (int i = 0; i < rows; ++i) y.push_back(kAllClasses[rng() % 3]);
    const auto head = ProjectionHead::initialize(64, 200 + b);
    worst = std::max(worst, gradient_check(head, x, y, 1e-4, 64, 300 + b));
  }
  return {worst < kGradientTolerance, "3 batches x 64 parameters, max relative error " + fmt(worst)};
}

Outcome end_to_end(SplitMode split, double floor) {
  const auto& ds = synthetic();
  const auto t0 = Clock::now();
  const auto fused = run_experiment(experiment(FeatureMode::Fused, split), &ds);
  const double t_fused = seconds_since(t0);
  const auto motif = run_experiment(experiment(FeatureMode::MotifOnly, split), &ds);
  const double a = fused.metrics.accuracy, b = motif.metrics.accuracy;
  const bool ok = a >= floor && a >= b && t_fused < kEndToEndBudgetSeconds;
  return {ok, "fused " + fmt(a) + " vs motif-only " + fmt(b) + " on " + std::to_string(fused.n_test) +
                  " test items, fused run " + fmt(t_fused) + " s"};
}

Outcome determinism() {
  const auto& ds = synthetic();
  const auto cfg = experiment(FeatureMode::Fused, SplitMode::Generality);
  const auto r1 = run_experiment(cfg, &ds);
  const auto r2 = run_experiment(cfg, &ds);
  if (r1.to_json(false).dump() != r2.to_json(false).dump()) return {false, "reports differ"};
  if (feature_csv(ds, &*r1.bundle) != feature_csv(ds, &*r2.bundle)) return {false, "feature CSVs differ"};
  if (feature_csv(ds) != feature_csv(ds)) return {false, "raw motif CSVs differ"};

  const auto dir = std::filesystem::temp_directory_path() / ("xsema-acceptance-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  save_model(*r1.bundle, dir / "model.json");
  const auto loaded = load_model(dir / "model.json");
  std::filesystem::remove_all(dir);

  // 100 random inputs: items drawn from a differently seeded generator run.
  SynthConfig other;
  other.n_per_class = 34;
  other.noise_rate = 0.3;
  other.seed = 4242;
  const auto probe = generate_synthetic(other);
  std::vector<TransactionMetadata> items;
  for (std::size_t i = 0; i < 100; ++i) items.push_back(probe.items[i].metadata);
  const bool same = predict_bundle(loaded, items) == predict_bundle(*r1.bundle, items);
  return {same, "reports and feature CSVs byte-identical; reloaded bundle agrees on 100 inputs"};
}

Outcome truncation() {
  TransactionMetadata a;
  a.hash = "0x" + std::string(64, 'b');
  a.chain = "eth";
  for (int i = 0; i < 100; ++i) a.el.push_back({"Transfer", {{"address", "from"}, {"address", "to"}}, {}});
  TransactionMetadata b = a;
  for (auto& e : b.el | std::views::drop(90)) e.name = "Approval";
  b.el.push_back({"Sync", {{"uint112", "reserve0"}}, {}});

  const auto ta = build_event_text(a, kTokenBudget), tb = build_event_text(b, kTokenBudget);
  const auto full = build_event_text(a, 100000);
  if (full.token_count <= kTokenBudget) return {false, "probe text is not longer than the budget"};
  if (ta.token_count != kTokenBudget || !ta.truncated || tokenize(ta.text).size() != kTokenBudget) {
    return {false, "cut at " + std::to_string(ta.token_count) + " tokens"};
  }
  if (ta.text != tb.text) return {false, "texts differ although the inputs agree up to the cut"};
  HashingProvider p;
  const auto ea = p.embed_batch({ta.text})[0], eb = p.embed_batch({tb.text})[0];
  const bool ok = ea == eb && ea == hashing_embed(tokenize(ta.text), {});
  return {ok, std::to_string(full.token_count) + "-token text cut at " + std::to_string(ta.token_count) +
                  ", embeddings identical past the cut"};
}

Outcome analysis() {
  const auto& ds = synthetic();
  const auto profile = motif_profile(ds);
  std::vector<int> higher(kMotifSlots - 2);
  std::iota(higher.begin(), higher.end(), 2);
  const auto targets = SynthConfig::default_motif_targets();
  std::string detail;
  bool ok = true;
  for (auto c : {TxClass::DT, TxClass::WT}) {
    auto want = targets.at(c);
    auto got = profile.top_slots(c, want.size(), higher);
    std::sort(want.begin(), want.end());
    std::sort(got.begin(), got.end());
    ok = ok && got == want;
    detail += std::string(to_string(c)) + " top slots";
    for (int s : got) detail += " m" + std::to_string(s + 1);
    detail += "; ";
  }
  const auto terms = term_profile(ds);
  auto top = [&](TxClass c, const char* w) {
    const auto r = terms.rank_of(c, w);
    detail += std::string(w) + " #" + std::to_string(r) + " ";
    return r >= 1 && r <= kTopTerms;
  };
  const bool t1 = top(TxClass::DT, "toChainId");
  const bool t2 = top(TxClass::WT, "mintId");
  const bool t3 = top(TxClass::WT, "toAssetHash");
  return {ok && t1 && t2 && t3, detail};
}

}  // namespace

int main() {
  report("motif-oracle-equivalence", motif_oracle);
  report("metrics-identity-and-hand-case", metrics_identity);
  report("gradient-check", gradient);
  report("synthetic-generality", [] { return end_to_end(SplitMode::Generality, kGeneralityFloor); });
  report("synthetic-generalizability", [] { return end_to_end(SplitMode::Generalizability, kGeneralizabilityFloor); });
  report("determinism-and-persistence", determinism);
  report("truncation-contract", truncation);
  report("analysis-fidelity", analysis);
  return failures == 0 ? 0 : 1;
}
