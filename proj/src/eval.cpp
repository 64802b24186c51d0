#include "xsema/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "xsema/jsonio.hpp"

namespace xsema {

namespace {

constexpr const char* kComponent = "eval";

double ratio(std::int64_t num, std::int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::size_t test_count(std::size_t n, double fraction) {
  if (n < 2) return 0;
  const auto raw = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction));
  return std::clamp<std::size_t>(raw, 1, n - 1);
}

// Shuffles `cell` with `rng` and moves the first test_count entries to test.
void cut_cell(std::vector<std::size_t> cell, double fraction, std::mt19937_64& rng, Split& out) {
  std::shuffle(cell.begin(), cell.end(), rng);
  const std::size_t k = test_count(cell.size(), fraction);
  out.test.insert(out.test.end(), cell.begin(), cell.begin() + static_cast<std::ptrdiff_t>(k));
  out.train.insert(out.train.end(), cell.begin() + static_cast<std::ptrdiff_t>(k), cell.end());
}

void finish(Split& s) {
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
}

void require_items(const Dataset& ds) {
  if (ds.items.empty()) throw Error(ErrorCode::EmptyDataset, kComponent, "dataset has no items");
  ds.require_labeled();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::int64_t ConfusionMatrix::tp(TxClass c) const {
  const int i = class_index(c);
  return counts(i, i);
}

std::int64_t ConfusionMatrix::fp(TxClass c) const {
  const int i = class_index(c);
  return counts.col(i).sum() - counts(i, i);
}

std::int64_t ConfusionMatrix::fn(TxClass c) const {
  const int i = class_index(c);
  return counts.row(i).sum() - counts(i, i);
}

std::int64_t ConfusionMatrix::tn(TxClass c) const { return total() - tp(c) - fp(c) - fn(c); }

nlohmann::json ConfusionMatrix::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (int t = 0; t < kNumClasses; ++t) {
    nlohmann::json row = nlohmann::json::array();
    for (int p = 0; p < kNumClasses; ++p) row.push_back(counts(t, p));
    rows.push_back(row);
  }
  return {{"classes", {"NT", "DT", "WT"}}, {"counts", rows}};
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json per = nlohmann::json::object();
  for (TxClass c : kAllClasses) {
    const auto& s = per_class[class_index(c)];
    per[std::string(to_string(c))] = {
        {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}, {"support", s.support}};
  }
  return {{"micro_precision", micro_precision},
          {"micro_recall", micro_recall},
          {"accuracy", accuracy},
          {"f1_macro", f1_macro},
          {"per_class", per},
          {"confusion", confusion.to_json()}};
}

MetricsReport compute_metrics(std::span<const TxClass> y_true, std::span<const TxClass> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw Error(ErrorCode::LengthMismatch, kComponent,
                std::to_string(y_true.size()) + " labels vs " + std::to_string(y_pred.size()) + " predictions");
  }
  if (y_true.empty()) throw Error(ErrorCode::EmptyInput, kComponent, "no samples to score");

  MetricsReport r;
  for (std::size_t i = 0; i < y_true.size(); ++i) r.confusion.counts(class_index(y_true[i]), class_index(y_pred[i]))++;

  const auto& cm = r.confusion;
  std::int64_t tp = 0, fp = 0, fn = 0;
  double f1_sum = 0.0;
  for (TxClass c : kAllClasses) {
    auto& s = r.per_class[class_index(c)];
    s.precision = ratio(cm.tp(c), cm.tp(c) + cm.fp(c));
    s.recall = ratio(cm.tp(c), cm.tp(c) + cm.fn(c));
    s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    s.support = cm.tp(c) + cm.fn(c);
    tp += cm.tp(c);
    fp += cm.fp(c);
    fn += cm.fn(c);
    f1_sum += s.f1;
  }
  r.micro_precision = ratio(tp, tp + fp);
  r.micro_recall = ratio(tp, tp + fn);
  r.accuracy = ratio(cm.counts.trace(), cm.total());
  r.f1_macro = f1_sum / kNumClasses;
  return r;
}

std::string_view to_string(SplitMode m) noexcept {
  return m == SplitMode::Generality ? "generality" : "generalizability";
}

std::optional<SplitMode> parse_split_mode(std::string_view s) noexcept {
  if (s == "generality") return SplitMode::Generality;
  if (s == "generalizability") return SplitMode::Generalizability;
  return std::nullopt;
}

std::vector<std::string> default_train_bridges() {
  return {"Allbridge core", "Celer cbridge", "Multichain", "Stargate"};
}

void SplitPlan::validate() const {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::ConfigInvalid, kComponent, "test_fraction must lie in (0, 1)");
  }
  if (mode == SplitMode::Generalizability) {
    if (train_bridges.empty()) throw Error(ErrorCode::EmptyTrainBridges, kComponent, "train_bridges is empty");
    const std::set<std::string> train(train_bridges.begin(), train_bridges.end());
    for (const auto& b : test_bridges) {
      if (train.count(b)) throw Error(ErrorCode::BridgeOverlap, kComponent, "bridge '" + b + "' is on both sides");
    }
  }
}

nlohmann::json SplitPlan::to_json() const {
  return {{"mode", std::string(to_string(mode))},
          {"test_fraction", test_fraction},
          {"train_bridges", train_bridges},
          {"test_bridges", test_bridges},
          {"seed", seed}};
}

SplitPlan SplitPlan::from_json(const nlohmann::json& j) {
  SplitPlan p;
  try {
    if (auto m = j.find("mode"); m != j.end()) {
      auto mode = parse_split_mode(m->get<std::string>());
      if (!mode) throw Error(ErrorCode::ConfigInvalid, kComponent, "unknown split mode " + m->dump());
      p.mode = *mode;
    }
    p.test_fraction = j.value("test_fraction", p.test_fraction);
    p.train_bridges = j.value("train_bridges", p.train_bridges);
    p.test_bridges = j.value("test_bridges", p.test_bridges);
    p.seed = j.value("seed", p.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, kComponent, std::string("malformed split plan: ") + e.what());
  }
  return p;
}

Split split_generality(const Dataset& ds, const SplitPlan& plan) {
  require_items(ds);
  plan.validate();
  std::map<std::pair<int, std::string>, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < ds.items.size(); ++i) {
    const auto& l = *ds.items[i].label;
    cells[{class_index(l.value()), l.bridge().value_or("")}].push_back(i);
  }
  Split out;
  std::mt19937_64 rng(plan.seed);
  for (auto& [key, cell] : cells) cut_cell(std::move(cell), plan.test_fraction, rng, out);
  finish(out);
  return out;
}

Split split_generalizability(const Dataset& ds, const SplitPlan& plan) {
  require_items(ds);
  plan.validate();
  const std::set<std::string> train(plan.train_bridges.begin(), plan.train_bridges.end());
  const std::set<std::string> test(plan.test_bridges.begin(), plan.test_bridges.end());
  Split out;
  std::vector<std::size_t> nt;
  for (std::size_t i = 0; i < ds.items.size(); ++i) {
    const auto& l = *ds.items[i].label;
    if (l.value() == TxClass::NT) {
      nt.push_back(i);
      continue;
    }
    if (!l.bridge()) {
      throw Error(ErrorCode::SchemaViolation, kComponent, "cross-chain item " + ds.items[i].metadata.hash + " has no bridge");
    }
    const auto& b = *l.bridge();
    if (train.count(b)) {
      out.train.push_back(i);
    } else if (test.empty() || test.count(b)) {
      out.test.push_back(i);
    }
  }
  std::mt19937_64 rng(plan.seed);
  cut_cell(std::move(nt), plan.test_fraction, rng, out);
  finish(out);
  return out;
}

Split make_split(const Dataset& ds, const SplitPlan& plan) {
  return plan.mode == SplitMode::Generality ? split_generality(ds, plan) : split_generalizability(ds, plan);
}

std::vector<LabeledTransaction> subset(const Dataset& ds, std::span<const std::size_t> indices) {
  std::vector<LabeledTransaction> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(ds.items.at(i));
  return out;
}

ExperimentConfig ExperimentConfig::resolved() const {
  ExperimentConfig c = *this;
  if (seed) {
    c.split.seed = *seed;
    c.pipeline.projection.seed = derive_seed(*seed, 1);
    c.pipeline.classifier.seed = derive_seed(*seed, 2);
  }
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j = {{"dataset", dataset}, {"pipeline", pipeline.to_json()}, {"split", split.to_json()}};
  j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigInvalid, kComponent, "experiment config must be a JSON object");
  ExperimentConfig c;
  try {
    c.dataset = j.value("dataset", std::string());
    if (auto p = j.find("pipeline"); p != j.end()) c.pipeline = PipelineConfig::from_json(*p);
    if (auto s = j.find("split"); s != j.end()) c.split = SplitPlan::from_json(*s);
    if (auto s = j.find("seed"); s != j.end() && !s->is_null()) c.seed = s->get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, kComponent, std::string("malformed experiment config: ") + e.what());
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, kComponent, "cannot open config " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigInvalid, kComponent, path.string() + ": " + e.what());
  }
}

nlohmann::json ExperimentReport::to_json(bool with_timing) const {
  nlohmann::json bridges = nlohmann::json::object();
  for (const auto& [name, s] : per_bridge) {
    bridges[name] = {{"total", s.total}, {"correct", s.correct}, {"accuracy", s.accuracy()}};
  }
  nlohmann::json j = {{"config", config},       {"seed", seed},        {"n_train", n_train},
                      {"n_test", n_test},       {"metrics", metrics.to_json()}, {"per_bridge", bridges}};
  if (with_timing) j["timing"] = timing_seconds;
  return j;
}

std::string ExperimentReport::csv_header() {
  return "dataset,split,feature_mode,algorithm,seed,n_train,n_test,precision,recall,accuracy,f1_macro";
}

std::string ExperimentReport::csv_row() const {
  std::ostringstream out;
  out << csv_field(config.value("dataset", std::string())) << ','
      << config["split"].value("mode", std::string()) << ','
      << config["pipeline"].value("feature_mode", std::string()) << ','
      << config["pipeline"]["classifier"].value("algorithm", std::string()) << ',' << seed << ',' << n_train << ','
      << n_test << ',' << format_real(metrics.micro_precision) << ',' << format_real(metrics.micro_recall) << ','
      << format_real(metrics.accuracy) << ',' << format_real(metrics.f1_macro);
  return out.str();
}

ExperimentReport run_experiment(const ExperimentConfig& raw, const Dataset* ds, const EmbeddingProvider* provider) {
  using Clock = std::chrono::steady_clock;
  const auto seconds = [](Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  };
  const ExperimentConfig cfg = raw.resolved();
  const auto t0 = Clock::now();

  Dataset loaded;
  if (!ds) {
    if (cfg.dataset.empty()) throw Error(ErrorCode::ConfigInvalid, kComponent, "config names no dataset");
    loaded = load_labeled_jsonl(cfg.dataset);
    ds = &loaded;
  }
  const Split split = make_split(*ds, cfg.split);
  if (split.train.empty()) throw Error(ErrorCode::EmptyTrain, kComponent, "split left no training items");
  if (split.test.empty()) throw Error(ErrorCode::EmptyInput, kComponent, "split left no test items");
  const auto train = subset(*ds, split.train);
  const auto test = subset(*ds, split.test);
  const auto t1 = Clock::now();

  ModelBundle bundle = train_bundle(train, cfg.pipeline, provider);
  const auto t2 = Clock::now();

  const auto test_meta = metadata_of(test);
  const auto truth = labels_of(test);
  const auto pred = predict_bundle(bundle, test_meta, provider);
  const auto t3 = Clock::now();

  ExperimentReport r;
  r.config = cfg.to_json();
  r.seed = cfg.seed.value_or(cfg.split.seed);
  r.n_train = train.size();
  r.n_test = test.size();
  r.metrics = compute_metrics(truth, pred);
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto& bridge = test[i].label->bridge();
    if (!bridge) continue;
    auto& s = r.per_bridge[*bridge];
    s.total++;
    if (pred[i] == truth[i]) s.correct++;
  }
  r.timing_seconds = {{"split", seconds(t0, t1)}, {"train", seconds(t1, t2)}, {"predict", seconds(t2, t3)},
                      {"total", seconds(t0, t3)}};
  r.bundle = std::move(bundle);
  return r;
}

std::string feature_csv(const Dataset& ds, const ModelBundle* bundle, const EmbeddingProvider* provider) {
  std::vector<TransactionMetadata> meta;
  meta.reserve(ds.items.size());
  for (const auto& t : ds.items) meta.push_back(t.metadata);

  Eigen::MatrixXd x;
  std::vector<std::string> names;
  if (bundle) {
    x = bundle_features(*bundle, meta, provider);
    for (int i = 0; i < kMotifSlots && bundle->mode != FeatureMode::TextOnly; ++i) names.push_back("m" + std::to_string(i + 1));
    if (bundle->mode != FeatureMode::MotifOnly) {
      for (int i = 0; i < ProjectionHead::kProjection; ++i) names.push_back("p" + std::to_string(i + 1));
    }
  } else {
    x = assemble_features(FeatureMode::MotifOnly, motif_features(meta), {});
    for (int i = 0; i < kMotifSlots; ++i) names.push_back("m" + std::to_string(i + 1));
  }

  std::ostringstream out;
  out << "hash,label,bridge";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (std::size_t r = 0; r < ds.items.size(); ++r) {
    const auto& t = ds.items[r];
    out << t.metadata.hash << ',' << (t.label ? to_string(t.label->value()) : "") << ','
        << (t.label && t.label->bridge() ? csv_field(*t.label->bridge()) : "");
    for (Eigen::Index c = 0; c < x.cols(); ++c) out << ',' << format_real(x(static_cast<Eigen::Index>(r), c));
    out << '\n';
  }
  return out.str();
}

}  // namespace xsema
