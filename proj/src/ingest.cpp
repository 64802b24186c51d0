#include "xsema/ingest.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "xsema/jsonio.hpp"

namespace xsema {

void Dataset::add(LabeledTransaction t) {
  for (const auto& existing : items) {
    if (existing.metadata.hash == t.metadata.hash) {
      throw Error(ErrorCode::DuplicateHash, "ingest", "duplicate transaction hash " + t.metadata.hash);
    }
  }
  items.push_back(std::move(t));
}

void Dataset::require_labeled() const {
  for (const auto& t : items) {
    if (!t.label) {
      throw Error(ErrorCode::SchemaViolation, "ingest", "transaction " + t.metadata.hash + " has no label");
    }
  }
}

Dataset load_labeled_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "ingest", "cannot open " + path.string());
  Dataset ds;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::ParseError, "ingest",
                  path.string() + ":" + std::to_string(lineno) + ": " + e.what(), lineno);
    }
    LabeledTransaction t;
    try {
      t = record_from_json(j);
    } catch (const Error& e) {
      throw Error(ErrorCode::SchemaViolation, "ingest",
                  path.string() + ":" + std::to_string(lineno) + ": " + e.what(), lineno);
    }
    if (!seen.insert(t.metadata.hash).second) {
      throw Error(ErrorCode::DuplicateHash, "ingest", "duplicate transaction hash " + t.metadata.hash, lineno);
    }
    ds.items.push_back(std::move(t));
  }
  if (in.bad()) throw Error(ErrorCode::IoError, "ingest", "read failure on " + path.string());
  ds.source_manifest[path.string()] = ds.items.size();
  return ds;
}

std::string to_jsonl(const Dataset& ds) {
  std::string out;
  for (const auto& t : ds.items) {
    out += record_to_json(t).dump();
    out += '\n';
  }
  return out;
}

void write_jsonl(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "ingest", "cannot write " + path.string());
  out << to_jsonl(ds);
  if (!out) throw Error(ErrorCode::IoError, "ingest", "write failure on " + path.string());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

MergeResult merge_label_file(Dataset ds, const std::filesystem::path& labels, MergeOptions opts) {
  std::ifstream in(labels);
  if (!in) throw Error(ErrorCode::IoError, "ingest", "cannot open " + labels.string());

  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::SchemaViolation, "ingest", labels.string() + ": missing header", 1);
  }
  ++lineno;
  if (split_csv_line(line) != std::vector<std::string>{"hash", "label", "bridge"}) {
    throw Error(ErrorCode::SchemaViolation, "ingest", labels.string() + ": header must be 'hash,label,bridge'", 1);
  }

  std::unordered_map<std::string, Label> rows;
  std::vector<std::string> order;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv_line(line);
    if (cells.size() < 2 || cells.size() > 3) {
      throw Error(ErrorCode::ParseError, "ingest",
                  labels.string() + ":" + std::to_string(lineno) + ": expected 3 columns", lineno);
    }
    std::string hash;
    std::optional<TxClass> cls;
    std::optional<Label> label;
    try {
      hash = normalize_tx_hash(cells[0]);
      cls = parse_class(cells[1]);
      if (!cls) throw Error(ErrorCode::SchemaViolation, "ingest", "label must be NT, DT or WT");
      std::optional<std::string> bridge;
      if (cells.size() == 3 && !cells[2].empty()) bridge = cells[2];
      label = Label(*cls, bridge);
    } catch (const Error& e) {
      throw Error(ErrorCode::SchemaViolation, "ingest",
                  labels.string() + ":" + std::to_string(lineno) + ": " + e.what(), lineno);
    }
    auto [it, inserted] = rows.emplace(hash, *label);
    if (!inserted) {
      if (!(it->second == *label)) {
        throw Error(ErrorCode::ConflictingLabel, "ingest", "conflicting labels for " + hash, lineno);
      }
      continue;
    }
    order.push_back(hash);
  }

  MergeResult result;
  std::unordered_set<std::string> matched;
  for (auto& t : ds.items) {
    if (auto it = rows.find(t.metadata.hash); it != rows.end()) {
      t.label = it->second;
      matched.insert(it->first);
      ++result.updated;
    }
  }
  for (const auto& h : order) {
    if (!matched.count(h)) result.unmatched_rows.push_back(h);
  }
  for (auto& t : ds.items) {
    if (t.label) continue;
    if (!opts.default_nt) {
      throw Error(ErrorCode::MissingDefault, "ingest",
                  "transaction " + t.metadata.hash + " has no label row and default-NT is off");
    }
    t.label = Label::nt();
  }
  ds.source_manifest[labels.string()] = rows.size();
  result.dataset = std::move(ds);
  return result;
}

std::map<std::string, std::size_t> bridge_counts(const Dataset& ds) {
  std::map<std::string, std::size_t> out;
  for (const auto& t : ds.items) {
    if (t.label && t.label->bridge()) ++out[*t.label->bridge()];
  }
  return out;
}

}  // namespace xsema
