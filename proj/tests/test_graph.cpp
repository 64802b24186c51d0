#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "testing.hpp"
#include "xsema/graph.hpp"
#include "xsema/motif.hpp"

using namespace xsema;
using namespace xsema::testing;

TEST(AssetGraph, Fig3IsAPath) {
  const auto g = build_asset_graph(fig3_metadata());
  ASSERT_EQ(g.node_count(), 3u);
  ASSERT_EQ(g.edge_count(), 2u);
  EXPECT_EQ(g.nodes()[0].hex(), kUser);
  EXPECT_EQ(g.nodes()[1].hex(), kRouter);
  EXPECT_EQ(g.nodes()[2].hex(), kWeth);
  EXPECT_TRUE(g.has_edge(0, 1));
  EXPECT_TRUE(g.has_edge(1, 2));
  EXPECT_FALSE(g.has_edge(0, 2));
  EXPECT_EQ(g.annotations({1, 2})[0].kind, TransferKind::Internal);
}

TEST(AssetGraph, EmptyTransaction) {
  TransactionMetadata m;
  m.hash = tx_hash(1);
  m.chain = "eth";
  const auto g = build_asset_graph(m);
  EXPECT_EQ(g.node_count(), 0u);
  EXPECT_EQ(g.edge_count(), 0u);
}

TEST(AssetGraph, ParallelTransfersCollapse) {
  TransactionMetadata m;
  m.hash = tx_hash(1);
  m.chain = "eth";
  m.et.push_back(transfer(address(1), address(2), TransferKind::External, "5"));
  m.erc20.push_back(transfer(address(1), address(2), TransferKind::Erc20, "7"));
  const auto g = build_asset_graph(m);
  EXPECT_EQ(g.edge_count(), 1u);
  ASSERT_EQ(g.annotations({0, 1}).size(), 2u);
  EXPECT_EQ(g.annotations({0, 1})[1].value, "7");
  EXPECT_EQ(g.annotation_count(), 2u);
}

TEST(AssetGraph, SelfTransfersAnnotatedOnly) {
  TransactionMetadata m;
  m.hash = tx_hash(1);
  m.chain = "eth";
  m.erc20.push_back(transfer(address(1), address(1), TransferKind::Erc20, "3"));
  m.et.push_back(transfer(address(1), address(2), TransferKind::External));
  const auto g = build_asset_graph(m);
  EXPECT_EQ(g.edge_count(), 1u);
  EXPECT_EQ(g.self_transfers().size(), 1u);
  EXPECT_EQ(g.annotation_count(), 1u);
}

TEST(AssetGraph, TokenContractIsNotANode) {
  TransactionMetadata m;
  m.hash = tx_hash(1);
  m.chain = "eth";
  m.erc20.push_back(transfer(address(1), address(2), TransferKind::Erc20));
  EXPECT_EQ(build_asset_graph(m).node_count(), 2u);
}

TEST(AssetGraph, SizeInvariants) {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 100; ++k) {
    TransactionMetadata m;
    m.hash = tx_hash(k);
    m.chain = "eth";
    const int n = 1 + static_cast<int>(rng() % 6);
    std::size_t non_self = 0;
    for (int i = 0; i < 12; ++i) {
      const int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
      m.erc20.push_back(transfer(address(a), address(b), TransferKind::Erc20));
      non_self += a != b;
    }
    const auto g = build_asset_graph(m);
    EXPECT_LE(g.edge_count(), g.node_count() * (g.node_count() - 1));
    EXPECT_EQ(g.annotation_count(), non_self);
  }
}

TEST(AssetGraph, ShuffledRecordsGiveSameCensus) {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 50; ++k) {
    TransactionMetadata m;
    m.hash = tx_hash(k);
    m.chain = "eth";
    for (int i = 0; i < 10; ++i) {
      m.et.push_back(transfer(address(static_cast<int>(rng() % 7)), address(static_cast<int>(rng() % 7)),
                              TransferKind::External));
    }
    const auto g1 = build_asset_graph(m);
    std::shuffle(m.et.begin(), m.et.end(), rng);
    const auto g2 = build_asset_graph(m);
    EXPECT_EQ(g1.edge_count(), g2.edge_count());
    EXPECT_EQ(census_bruteforce(g1), census_bruteforce(g2));
  }
}

TEST(AssetGraph, EdgeListExport) {
  const auto text = build_asset_graph(fig3_metadata()).to_edge_list();
  EXPECT_NE(text.find(kUser + " " + kRouter + " external 500000000000000000"), std::string::npos);
  EXPECT_NE(text.find(kRouter + " " + kWeth + " internal 500000000000000000"), std::string::npos);
}

TEST(AssetGraph, FromEdgesDropsLoopsAndDuplicates) {
  const auto g = AssetTransferGraph::from_edges(3, {{0, 1}, {0, 1}, {2, 2}, {1, 2}});
  EXPECT_EQ(g.node_count(), 3u);
  EXPECT_EQ(g.edge_count(), 2u);
}
