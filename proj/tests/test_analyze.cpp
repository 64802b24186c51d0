#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "testing.hpp"
#include "xsema/analyze.hpp"
#include "xsema/synth.hpp"

using namespace xsema;
using namespace xsema::testing;

namespace {

const Dataset& synthetic() {
  static const Dataset ds = [] {
    SynthConfig cfg;
    cfg.n_per_class = 120;
    cfg.noise_rate = 0.05;
    cfg.seed = 21;
    return generate_synthetic(cfg);
  }();
  return ds;
}

std::vector<int> higher_order_slots() {
  std::vector<int> s(kMotifSlots - 2);
  std::iota(s.begin(), s.end(), 2);
  return s;
}

LabeledTransaction with_events(int id, Label label, std::vector<EventLogEntry> events) {
  auto m = metadata_from_edges(id, {{0, 1}});
  m.el = std::move(events);
  return {validate_metadata(m), std::move(label)};
}

}  // namespace

TEST(MotifProfileTest, SingleSampleShare) {
  MotifVector v = MotifVector::Zero();
  v(5) = 2;
  const std::vector<MotifVector> f{v};
  const std::vector<TxClass> y{TxClass::DT};
  const auto p = motif_profile(f, y);
  EXPECT_EQ(p.shares[1](5), 1.0);
  EXPECT_EQ(p.means[1](5), 2.0);
  EXPECT_EQ(p.samples[1], 1);
  EXPECT_EQ(p.samples[0], 0);
}

TEST(MotifProfileTest, ZeroTotalGivesZeroShares) {
  const std::vector<MotifVector> f{MotifVector::Zero(), MotifVector::Zero()};
  const std::vector<TxClass> y{TxClass::NT, TxClass::NT};
  const auto p = motif_profile(f, y);
  EXPECT_TRUE(p.shares[0].isZero(0.0));
}

TEST(MotifProfileTest, Errors) {
  const std::vector<MotifVector> f{MotifVector::Zero()};
  const std::vector<TxClass> none, two{TxClass::NT, TxClass::DT};
  EXPECT_THROW(motif_profile(std::span<const MotifVector>{}, none), Error);
  EXPECT_THROW(motif_profile(f, two), Error);
}

TEST(MotifProfileTest, TopSlotsTieBreakAndCandidates) {
  MotifVector v = MotifVector::Zero();
  v(3) = 4;
  v(7) = 4;
  v(1) = 9;
  const std::vector<MotifVector> f{v};
  const std::vector<TxClass> y{TxClass::WT};
  const auto p = motif_profile(f, y);
  EXPECT_EQ(p.top_slots(TxClass::WT, 3), (std::vector<int>{1, 3, 7}));
  const std::vector<int> cand{7, 3};
  EXPECT_EQ(p.top_slots(TxClass::WT, 5, cand), (std::vector<int>{3, 7}));
}

TEST(MotifProfileTest, SyntheticTopSlotsMatchTargets) {
  const auto p = motif_profile(synthetic());
  const auto targets = SynthConfig::default_motif_targets();
  const auto cand = higher_order_slots();
  for (auto c : {TxClass::DT, TxClass::WT}) {
    const auto& want = targets.at(c);
    auto got = p.top_slots(c, want.size(), cand);
    std::sort(got.begin(), got.end());
    auto sorted_want = want;
    std::sort(sorted_want.begin(), sorted_want.end());
    EXPECT_EQ(got, sorted_want) << to_string(c);
  }
}

TEST(MotifProfileTest, CsvShape) {
  const auto csv = motif_profile(synthetic()).to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "class,kind,m1,m2,m3,m4,m5,m6,m7,m8,m9,m10,m11,m12,m13,m14,m15,m16");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(TermProfileTest, CountsParamNames) {
  Dataset ds;
  std::vector<EventLogEntry> events;
  for (int i = 0; i < 7; ++i) events.push_back(event("LogAnySwapOut", {{"uint256", "toChainId"}}));
  ds.add(with_events(1, Label(TxClass::DT, "Multichain"), events));
  ds.add(with_events(2, Label::nt(), {}));
  const auto t = term_profile(ds);
  EXPECT_EQ(t.counts[1].at("toChainId"), 7);
  EXPECT_EQ(t.counts[1].at("LogAnySwapOut"), 7);
  EXPECT_TRUE(t.counts[0].empty());
  EXPECT_EQ(t.rank_of(TxClass::DT, "toChainId"), 2u);
  EXPECT_EQ(t.rank_of(TxClass::DT, "mintId"), 0u);
  EXPECT_EQ(t.to_json()["DT"][0], (nlohmann::json{"LogAnySwapOut", 7}));
}

TEST(TermProfileTest, SyntheticVocabulary) {
  const auto t = term_profile(synthetic());
  EXPECT_LE(t.rank_of(TxClass::DT, "toChainId"), 5u);
  EXPECT_GE(t.rank_of(TxClass::DT, "toChainId"), 1u);
  for (const char* w : {"mintId", "toAssetHash"}) {
    EXPECT_GE(t.rank_of(TxClass::WT, w), 1u);
    EXPECT_LE(t.rank_of(TxClass::WT, w), 5u);
  }
  for (const char* w : {"token", "permit"}) {
    EXPECT_GE(t.rank_of(TxClass::NT, w), 1u);
    EXPECT_LE(t.rank_of(TxClass::NT, w), 5u);
  }
}

TEST(TermProfileTest, ClassCountsSumToWhole) {
  const auto& ds = synthetic();
  const auto t = term_profile(ds);
  TermCounts whole;
  for (const auto& item : ds.items) {
    for (const auto& e : item.metadata.el) {
      ++whole[e.name];
      for (const auto& p : e.params) {
        if (!p.name.empty()) ++whole[p.name];
      }
    }
  }
  TermCounts summed;
  for (const auto& per : t.counts) {
    for (const auto& [term, n] : per) summed[term] += n;
  }
  EXPECT_EQ(summed, whole);
}

TEST(Profiles, InvariantToItemOrder) {
  Dataset shuffled = synthetic();
  std::mt19937_64 rng(2);
  std::shuffle(shuffled.items.begin(), shuffled.items.end(), rng);
  EXPECT_EQ(term_profile(shuffled).to_json(), term_profile(synthetic()).to_json());
  EXPECT_EQ(motif_profile(shuffled).to_csv(), motif_profile(synthetic()).to_csv());
}

TEST(Profiles, RankedOrder) {
  TermProfile t;
  t.counts[2] = {{"b", 3}, {"a", 3}, {"c", 5}};
  const auto r = t.ranked(TxClass::WT);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].first, "c");
  EXPECT_EQ(r[1].first, "a");
  EXPECT_EQ(r[2].first, "b");
}
