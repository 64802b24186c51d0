#include "xsema/jsonio.hpp"

#include <array>
#include <charconv>

namespace xsema {

namespace {

[[noreturn]] void schema_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::SchemaViolation, "ingest", "field '" + field + "': " + what);
}

const Json& require(const Json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) schema_error(path + key, "missing");
  return *it;
}

std::string require_string(const Json& j, const char* key, const std::string& path) {
  const Json& v = require(j, key, path);
  if (!v.is_string()) schema_error(path + key, "expected string");
  return v.get<std::string>();
}

Address parse_address_field(const Json& v, const std::string& field) {
  if (!v.is_string()) schema_error(field, "expected address string");
  try {
    return Address::parse(v.get<std::string>());
  } catch (const Error& e) {
    schema_error(field, e.what());
  }
}

Json transfer_to_json(const TransferEdgeRecord& r) {
  Json j;
  j["from"] = r.from.hex();
  j["to"] = r.to.hex();
  j["value"] = r.value;
  j["token"] = r.token ? Json(r.token->hex()) : Json(nullptr);
  return j;
}

std::vector<TransferEdgeRecord> transfers_from_json(const Json& j, const char* key, TransferKind kind) {
  std::vector<TransferEdgeRecord> out;
  auto it = j.find(key);
  if (it == j.end()) schema_error(key, "missing");
  if (!it->is_array()) schema_error(key, "expected array");
  out.reserve(it->size());
  for (std::size_t i = 0; i < it->size(); ++i) {
    const Json& t = (*it)[i];
    std::string path = std::string(key) + "[" + std::to_string(i) + "].";
    if (!t.is_object()) schema_error(path, "expected object");
    TransferEdgeRecord r{parse_address_field(require(t, "from", path), path + "from"),
                         parse_address_field(require(t, "to", path), path + "to"),
                         require_string(t, "value", path), kind, std::nullopt};
    if (auto tok = t.find("token"); tok != t.end() && !tok->is_null()) {
      r.token = parse_address_field(*tok, path + "token");
    }
    if (!is_decimal_value(r.value)) schema_error(path + "value", "not a non-negative decimal");
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

Json metadata_to_json(const TransactionMetadata& m) {
  Json j;
  j["hash"] = m.hash;
  j["chain"] = m.chain;
  auto list = [](const std::vector<TransferEdgeRecord>& v) {
    Json a = Json::array();
    for (const auto& r : v) a.push_back(transfer_to_json(r));
    return a;
  };
  j["et"] = list(m.et);
  j["it"] = list(m.it);
  j["erc20"] = list(m.erc20);
  j["erc721"] = list(m.erc721);
  Json el = Json::array();
  for (const auto& e : m.el) {
    Json ej;
    ej["name"] = e.name;
    Json params = Json::array();
    for (const auto& p : e.params) params.push_back(Json::array({p.type, p.name}));
    ej["params"] = std::move(params);
    if (e.contract) ej["contract"] = e.contract->hex();
    el.push_back(std::move(ej));
  }
  j["el"] = std::move(el);
  return j;
}

TransactionMetadata metadata_from_json(const Json& j) {
  if (!j.is_object()) schema_error("<record>", "expected JSON object");
  TransactionMetadata m;
  m.hash = require_string(j, "hash", "");
  m.chain = require_string(j, "chain", "");
  m.et = transfers_from_json(j, "et", TransferKind::External);
  m.it = transfers_from_json(j, "it", TransferKind::Internal);
  m.erc20 = transfers_from_json(j, "erc20", TransferKind::Erc20);
  m.erc721 = transfers_from_json(j, "erc721", TransferKind::Erc721);
  const Json& el = require(j, "el", "");
  if (!el.is_array()) schema_error("el", "expected array");
  for (std::size_t i = 0; i < el.size(); ++i) {
    std::string path = "el[" + std::to_string(i) + "].";
    const Json& e = el[i];
    if (!e.is_object()) schema_error(path, "expected object");
    EventLogEntry entry;
    entry.name = require_string(e, "name", path);
    if (entry.name.empty()) schema_error(path + "name", "empty");
    const Json& params = require(e, "params", path);
    if (!params.is_array()) schema_error(path + "params", "expected array");
    for (const auto& p : params) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string()) {
        schema_error(path + "params", "expected [type, name] string pairs");
      }
      entry.params.push_back({p[0].get<std::string>(), p[1].get<std::string>()});
    }
    if (auto c = e.find("contract"); c != e.end() && !c->is_null()) {
      entry.contract = parse_address_field(*c, path + "contract");
    }
    m.el.push_back(std::move(entry));
  }
  try {
    return validate_metadata(std::move(m));
  } catch (const Error& e) {
    schema_error("hash", e.what());
  }
}

Json record_to_json(const LabeledTransaction& t) {
  Json j = metadata_to_json(t.metadata);
  if (t.label) {
    j["label"] = std::string(to_string(t.label->value()));
    j["bridge"] = t.label->bridge() ? Json(*t.label->bridge()) : Json(nullptr);
  } else {
    j["label"] = nullptr;
    j["bridge"] = nullptr;
  }
  return j;
}

LabeledTransaction record_from_json(const Json& j) {
  LabeledTransaction t{metadata_from_json(j), std::nullopt};
  auto lab = j.find("label");
  if (lab == j.end() || lab->is_null()) return t;
  if (!lab->is_string()) schema_error("label", "expected string");
  auto cls = parse_class(lab->get<std::string>());
  if (!cls) schema_error("label", "must be one of NT, DT, WT");
  std::optional<std::string> bridge;
  if (auto b = j.find("bridge"); b != j.end() && !b->is_null()) {
    if (!b->is_string()) schema_error("bridge", "expected string or null");
    bridge = b->get<std::string>();
  }
  try {
    t.label = Label(*cls, std::move(bridge));
  } catch (const Error& e) {
    schema_error("bridge", e.what());
  }
  return t;
}

std::string format_real(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace xsema
