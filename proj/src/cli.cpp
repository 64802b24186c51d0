#include "xsema/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "xsema/analyze.hpp"
#include "xsema/bundle.hpp"
#include "xsema/eval.hpp"
#include "xsema/ingest.hpp"
#include "xsema/jsonio.hpp"
#include "xsema/rpc.hpp"
#include "xsema/synth.hpp"

namespace xsema {

namespace {

enum class LogLevel { Error, Warn, Info, Debug };

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  LogLevel level = LogLevel::Info;
};

class Logger {
 public:
  Logger(std::ostream& err, LogLevel level) : err_(err), level_(level) {}
  void info(const std::string& msg) const {
    if (level_ >= LogLevel::Info) err_ << "[info] " << msg << '\n';
  }
  void warn(const std::string& msg) const {
    if (level_ >= LogLevel::Warn) err_ << "[warn] " << msg << '\n';
  }

 private:
  std::ostream& err_;
  LogLevel level_;
};

nlohmann::json load_config(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cli", "cannot open config " + path);
  try {
    auto j = nlohmann::json::parse(in);
    if (!j.is_object()) throw Error(ErrorCode::ConfigInvalid, "cli", path + ": config must be a JSON object");
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigInvalid, "cli", path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cli", "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "cli", "write failure on " + path);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "ingest", "cannot open " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    line.erase(std::remove_if(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); }), line.end());
    if (!line.empty() && line[0] != '#') out.push_back(line);
  }
  return out;
}

ExperimentConfig experiment_config(const nlohmann::json& j, const Globals& g) {
  auto cfg = ExperimentConfig::from_json(j);
  if (g.seed) cfg.seed = g.seed;
  return cfg;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-chain transaction classification toolkit", "xsema"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  std::string level = "info";
  std::uint64_t seed_value = 0;
  app.add_option("--config", g.config_path, "JSON configuration file");
  auto* seed_opt = app.add_option("--seed", seed_value, "Seed overriding every configured seed");
  app.add_option("--log-level", level, "error, warn, info or debug")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}));

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate datasets and merge a label file");
  std::vector<std::string> ingest_inputs;
  std::string ingest_labels, ingest_output;
  bool default_nt = false;
  ingest->add_option("--input", ingest_inputs, "Dataset JSONL (repeatable)")->required();
  ingest->add_option("--labels", ingest_labels, "CSV with hash,label,bridge");
  ingest->add_flag("--default-nt", default_nt, "Label unmatched items NT");
  ingest->add_option("--output", ingest_output, "Merged dataset JSONL");

  // fetch
  auto* fetch = app.add_subcommand("fetch", "Fetch metadata for a list of hashes");
  std::string fetch_hashes, fetch_output;
  fetch->add_option("--hashes", fetch_hashes, "File with one hash per line")->required();
  fetch->add_option("--output", fetch_output, "Metadata JSONL")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic dataset");
  std::optional<int> synth_n;
  std::optional<double> synth_noise;
  std::string synth_output;
  synth->add_option("--n", synth_n, "Items per class");
  synth->add_option("--noise", synth_noise, "Fraction of items with a suppressed signal");
  synth->add_option("--output", synth_output, "Dataset JSONL")->required();

  // featurize
  auto* featurize = app.add_subcommand("featurize", "Write per-item feature rows");
  std::string feat_dataset, feat_bundle, feat_output;
  featurize->add_option("--dataset", feat_dataset, "Dataset JSONL")->required();
  featurize->add_option("--bundle", feat_bundle, "Model bundle; without it raw motif counts are written");
  featurize->add_option("--output", feat_output, "Feature CSV")->required();

  // train
  auto* train = app.add_subcommand("train", "Train a model bundle on a whole dataset");
  std::string train_dataset, train_output;
  train->add_option("--dataset", train_dataset, "Dataset JSONL (overrides the config)");
  train->add_option("--output", train_output, "Bundle path")->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Run a split/train/test experiment");
  std::string eval_dataset, eval_output, eval_csv, eval_mode, eval_split;
  bool omit_timing = false;
  evaluate->add_option("--dataset", eval_dataset, "Dataset JSONL (overrides the config)");
  evaluate->add_option("--output", eval_output, "Report JSON");
  evaluate->add_option("--csv", eval_csv, "Append the report's CSV row to this file");
  evaluate->add_option("--feature-mode", eval_mode, "motif-only, text-only or fused")
      ->check(CLI::IsMember({"motif-only", "text-only", "fused"}));
  evaluate->add_option("--split", eval_split, "generality or generalizability")
      ->check(CLI::IsMember({"generality", "generalizability"}));
  evaluate->add_flag("--omit-timing", omit_timing, "Leave timing out of the report");

  // predict
  auto* predict = app.add_subcommand("predict", "Label transactions with a trained bundle");
  std::string pred_bundle, pred_dataset, pred_output;
  predict->add_option("--bundle", pred_bundle, "Bundle path")->required();
  predict->add_option("--dataset", pred_dataset, "Dataset JSONL")->required();
  predict->add_option("--output", pred_output, "hash,label CSV (stdout when omitted)");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Motif and term profiles per class");
  std::string an_dataset, an_motif, an_terms;
  analyze->add_option("--dataset", an_dataset, "Dataset JSONL")->required();
  analyze->add_option("--motif-csv", an_motif, "Motif profile CSV")->required();
  analyze->add_option("--terms-json", an_terms, "Term profile JSON")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* sub = nullptr;
    for (const auto* s : app.get_subcommands()) sub = s;
    err << (sub ? sub->help() : app.help());
    return 1;
  }

  if (*seed_opt) g.seed = seed_value;
  g.level = level == "error" ? LogLevel::Error : level == "warn" ? LogLevel::Warn : level == "debug" ? LogLevel::Debug : LogLevel::Info;
  Logger log(err, g.level);

  try {
    const auto config = load_config(g.config_path);

    if (*ingest) {
      Dataset ds;
      for (const auto& path : ingest_inputs) {
        Dataset part = load_labeled_jsonl(path);
        for (auto& item : part.items) ds.add(std::move(item));
        for (const auto& [k, v] : part.source_manifest) ds.source_manifest[k] = v;
      }
      std::size_t updated = 0;
      if (!ingest_labels.empty() || default_nt) {
        if (ingest_labels.empty()) {
          for (auto& item : ds.items) {
            if (!item.label) {
              item.label = Label::nt();
              ++updated;
            }
          }
        } else {
          auto merged = merge_label_file(std::move(ds), ingest_labels, MergeOptions{default_nt});
          ds = std::move(merged.dataset);
          updated = merged.updated;
          for (const auto& row : merged.unmatched_rows) log.warn("label row matches no item: " + row);
        }
      }
      if (!ingest_output.empty()) write_jsonl(ds, ingest_output);
      const auto unlabeled = std::count_if(ds.items.begin(), ds.items.end(), [](const auto& t) { return !t.label; });
      out << "items " << ds.size() << ", labels updated " << updated << ", unlabeled " << unlabeled << '\n';
      for (const auto& [bridge, n] : bridge_counts(ds)) out << "  " << bridge << ": " << n << '\n';
      return 0;
    }

    if (*fetch) {
      if (!config.contains("rpc")) throw Error(ErrorCode::ConfigInvalid, "ingest", "config has no \"rpc\" section");
      RpcProvider provider(RpcProviderConfig::from_json(config.at("rpc")));
      Dataset ds;
      for (const auto& hash : read_lines(fetch_hashes)) {
        log.info("fetching " + hash);
        ds.add(LabeledTransaction{provider.fetch(hash), std::nullopt});
      }
      write_jsonl(ds, fetch_output);
      out << "fetched " << ds.size() << " transactions\n";
      return 0;
    }

    if (*synth) {
      SynthConfig sc = config.contains("synth") ? SynthConfig::from_json(config.at("synth")) : SynthConfig{};
      if (synth_n) sc.n_per_class = *synth_n;
      if (synth_noise) sc.noise_rate = *synth_noise;
      if (g.seed) sc.seed = *g.seed;
      const Dataset ds = generate_synthetic(sc);
      write_jsonl(ds, synth_output);
      out << "wrote " << ds.size() << " items to " << synth_output << '\n';
      return 0;
    }

    if (*featurize) {
      const Dataset ds = load_labeled_jsonl(feat_dataset);
      std::optional<ModelBundle> bundle;
      if (!feat_bundle.empty()) bundle = load_model(feat_bundle);
      write_text(feat_output, feature_csv(ds, bundle ? &*bundle : nullptr));
      out << "wrote " << ds.size() << " feature rows to " << feat_output << '\n';
      return 0;
    }

    if (*train) {
      auto cfg = experiment_config(config, g).resolved();
      if (!train_dataset.empty()) cfg.dataset = train_dataset;
      if (cfg.dataset.empty()) throw Error(ErrorCode::ConfigInvalid, "eval", "no dataset given");
      const Dataset ds = load_labeled_jsonl(cfg.dataset);
      ds.require_labeled();
      const auto bundle = train_bundle(ds.items, cfg.pipeline);
      save_model(bundle, train_output);
      out << "trained " << to_string(cfg.pipeline.classifier.algorithm) << " (" << to_string(cfg.pipeline.mode)
          << ") on " << ds.size() << " items -> " << train_output << '\n';
      return 0;
    }

    if (*evaluate) {
      auto cfg = experiment_config(config, g);
      if (!eval_dataset.empty()) cfg.dataset = eval_dataset;
      if (!eval_mode.empty()) cfg.pipeline.mode = *parse_feature_mode(eval_mode);
      if (!eval_split.empty()) cfg.split.mode = *parse_split_mode(eval_split);
      const auto report = run_experiment(cfg);
      const auto doc = report.to_json(!omit_timing).dump(2) + "\n";
      if (!eval_output.empty()) write_text(eval_output, doc);
      if (!eval_csv.empty()) {
        const bool fresh = !std::filesystem::exists(eval_csv) || std::filesystem::file_size(eval_csv) == 0;
        std::ofstream csv(eval_csv, std::ios::app);
        if (!csv) throw Error(ErrorCode::IoError, "cli", "cannot write " + eval_csv);
        if (fresh) csv << ExperimentReport::csv_header() << '\n';
        csv << report.csv_row() << '\n';
      }
      const auto& m = report.metrics;
      out << "train " << report.n_train << ", test " << report.n_test << "\n"
          << "precision " << format_real(m.micro_precision) << ", recall " << format_real(m.micro_recall)
          << ", accuracy " << format_real(m.accuracy) << ", f1_macro " << format_real(m.f1_macro) << '\n';
      return 0;
    }

    if (*predict) {
      const auto bundle = load_model(pred_bundle);
      const Dataset ds = load_labeled_jsonl(pred_dataset);
      const auto meta = metadata_of(ds.items);
      const auto labels = predict_bundle(bundle, meta);
      std::ostringstream csv;
      csv << "hash,label\n";
      for (std::size_t i = 0; i < meta.size(); ++i) csv << meta[i].hash << ',' << to_string(labels[i]) << '\n';
      if (pred_output.empty()) {
        out << csv.str();
      } else {
        write_text(pred_output, csv.str());
        out << "labeled " << meta.size() << " transactions -> " << pred_output << '\n';
      }
      return 0;
    }

    if (*analyze) {
      const Dataset ds = load_labeled_jsonl(an_dataset);
      const auto motifs = motif_profile(ds);
      const auto terms = term_profile(ds);
      write_text(an_motif, motifs.to_csv());
      write_text(an_terms, terms.to_json().dump(2) + "\n");
      for (TxClass c : kAllClasses) {
        out << to_string(c) << ": top slots";
        for (int s : motifs.top_slots(c, 3)) out << " m" << s + 1;
        out << "; top terms";
        const auto ranked = terms.ranked(c);
        for (std::size_t i = 0; i < std::min<std::size_t>(5, ranked.size()); ++i) out << ' ' << ranked[i].first;
        out << '\n';
      }
      return 0;
    }
  } catch (const Error& e) {
    err << "error [" << e.component() << "] " << to_string(e.code()) << ": " << e.what();
    if (e.line()) err << " (line " << *e.line() << ")";
    err << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error [cli] " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace xsema
