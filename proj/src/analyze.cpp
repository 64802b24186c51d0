#include "xsema/analyze.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "xsema/bundle.hpp"
#include "xsema/jsonio.hpp"

namespace xsema {

namespace {

constexpr const char* kComponent = "analyze";

}  // namespace

std::vector<int> MotifProfile::top_slots(TxClass c, std::size_t k, std::span<const int> candidates) const {
  std::vector<int> slots;
  if (candidates.empty()) {
    slots.resize(kMotifSlots);
    std::iota(slots.begin(), slots.end(), 0);
  } else {
    slots.assign(candidates.begin(), candidates.end());
  }
  const auto& s = shares[class_index(c)];
  std::stable_sort(slots.begin(), slots.end(), [&](int a, int b) { return s[a] > s[b] || (s[a] == s[b] && a < b); });
  if (slots.size() > k) slots.resize(k);
  return slots;
}

std::string MotifProfile::to_csv() const {
  std::ostringstream out;
  out << "class,kind";
  for (int i = 0; i < kMotifSlots; ++i) out << ",m" << i + 1;
  out << '\n';
  for (TxClass c : kAllClasses) {
    const int ci = class_index(c);
    out << to_string(c) << ",mean";
    for (int i = 0; i < kMotifSlots; ++i) out << ',' << format_real(means[ci][i]);
    out << '\n' << to_string(c) << ",share";
    for (int i = 0; i < kMotifSlots; ++i) out << ',' << format_real(shares[ci][i]);
    out << '\n';
  }
  return out.str();
}

MotifProfile motif_profile(std::span<const MotifVector> features, std::span<const TxClass> labels) {
  if (features.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, kComponent, "features and labels differ in length");
  }
  if (features.empty()) throw Error(ErrorCode::EmptyInput, kComponent, "no samples to profile");

  std::array<MotifVector, kNumClasses> sums;
  for (auto& s : sums) s.setZero();
  MotifProfile p;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const int c = class_index(labels[i]);
    sums[c] += features[i];
    p.samples[c]++;
  }
  for (int c = 0; c < kNumClasses; ++c) {
    const auto sum = sums[c].cast<double>();
    p.means[c] = p.samples[c] ? (sum / static_cast<double>(p.samples[c])).eval() : sum;
    const double total = sum.sum();
    p.shares[c] = total > 0.0 ? (sum / total).eval() : Eigen::Matrix<double, kMotifSlots, 1>::Zero().eval();
  }
  return p;
}

MotifProfile motif_profile(const Dataset& ds) {
  if (ds.items.empty()) throw Error(ErrorCode::EmptyInput, kComponent, "dataset has no items");
  ds.require_labeled();
  const auto meta = metadata_of(ds.items);
  return motif_profile(motif_features(meta), labels_of(ds.items));
}

std::vector<std::pair<std::string, std::int64_t>> TermProfile::ranked(TxClass c) const {
  const auto& m = counts[class_index(c)];
  std::vector<std::pair<std::string, std::int64_t>> out(m.begin(), m.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

std::size_t TermProfile::rank_of(TxClass c, const std::string& term) const {
  const auto r = ranked(c);
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i].first == term) return i + 1;
  }
  return 0;
}

nlohmann::json TermProfile::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (TxClass c : kAllClasses) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [term, n] : ranked(c)) rows.push_back({term, n});
    j[std::string(to_string(c))] = rows;
  }
  return j;
}

TermProfile term_profile(const Dataset& ds) {
  if (ds.items.empty()) throw Error(ErrorCode::EmptyInput, kComponent, "dataset has no items");
  ds.require_labeled();
  TermProfile p;
  for (const auto& t : ds.items) {
    auto& m = p.counts[class_index(t.label->value())];
    for (const auto& e : t.metadata.el) {
      m[e.name]++;
      for (const auto& param : e.params) {
        if (!param.name.empty()) m[param.name]++;
      }
    }
  }
  return p;
}

}  // namespace xsema
