#include <gtest/gtest.h>

#include <random>

#include "testing.hpp"
#include "xsema/core.hpp"
#include "xsema/jsonio.hpp"

using namespace xsema;
using namespace xsema::testing;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::ConfigInvalid;
}

}  // namespace

TEST(Address, LowercasesMixedCase) {
  EXPECT_EQ(normalize_address("0x4D9079Bb4165aeb4084c526a32695dCfd2F77381"), kRouter);
  EXPECT_EQ(Address::parse("0XC02AAA39B223FE8D0A0E5C4F27EAD9083C756CC2").hex(), kWeth);
}

TEST(Address, CanonicalInputUnchanged) { EXPECT_EQ(normalize_address(kUser), kUser); }

TEST(Address, RejectsMalformed) {
  EXPECT_EQ(code_of([] { normalize_address("0xZZ"); }), ErrorCode::MalformedHex);
  EXPECT_EQ(code_of([] { normalize_address("4d9079bb4165aeb4084c526a32695dcfd2f77381"); }), ErrorCode::MalformedHex);
  EXPECT_EQ(code_of([] { normalize_address("0x4d9079bb4165aeb4084c526a32695dcfd2f7738"); }), ErrorCode::MalformedHex);
  EXPECT_EQ(code_of([] { normalize_address("0x4d9079bb4165aeb4084c526a32695dcfd2f7738g"); }), ErrorCode::MalformedHex);
}

TEST(Address, NormalizationIsIdempotent) {
  std::mt19937_64 rng(3);
  const char* digits = "0123456789abcdefABCDEF";
  for (int k = 0; k < 200; ++k) {
    std::string raw = "0x";
    for (int i = 0; i < 40; ++i) raw += digits[rng() % 22];
    const auto once = normalize_address(raw);
    EXPECT_EQ(normalize_address(once), once);
  }
}

TEST(Address, AliasIsNotIdentity) {
  const auto plain = Address::parse(kUser);
  const auto named = plain.with_alias("zebra-valley.eth");
  EXPECT_EQ(plain, named);
  EXPECT_EQ(named.alias().value(), "zebra-valley.eth");
  EXPECT_FALSE(plain.alias());
}

TEST(TxHash, Canonicalizes) {
  EXPECT_EQ(normalize_tx_hash("0x00F2F49162F5F31E2419085F37B282A66D5EF1076E97FA21D5223FE215CCA46B"), kFig3Hash);
  EXPECT_EQ(code_of([] { normalize_tx_hash("0x00f2"); }), ErrorCode::MalformedHex);
}

TEST(Label, BridgeRequiredExactlyForCrossChain) {
  EXPECT_NO_THROW(Label(TxClass::NT));
  EXPECT_NO_THROW(Label(TxClass::DT, "Stargate"));
  EXPECT_EQ(code_of([] { Label(TxClass::DT); }), ErrorCode::SchemaViolation);
  EXPECT_EQ(code_of([] { Label(TxClass::WT, ""); }), ErrorCode::SchemaViolation);
  EXPECT_EQ(code_of([] { Label(TxClass::NT, "Stargate"); }), ErrorCode::SchemaViolation);
}

TEST(Label, ClassOrderIsTieBreakOrder) {
  EXPECT_EQ(class_index(TxClass::NT), 0);
  EXPECT_EQ(class_index(TxClass::DT), 1);
  EXPECT_EQ(class_index(TxClass::WT), 2);
  for (TxClass c : kAllClasses) EXPECT_EQ(parse_class(to_string(c)), c);
  EXPECT_FALSE(parse_class("XT"));
}

TEST(ValidateMetadata, KindMismatch) {
  auto m = fig3_metadata();
  m.et.push_back(transfer(kUser, kWeth, TransferKind::Internal));
  EXPECT_EQ(code_of([&] { validate_metadata(m); }), ErrorCode::KindMismatch);
}

TEST(ValidateMetadata, EmptyTransactionIsValid) {
  TransactionMetadata m;
  m.hash = tx_hash(1);
  m.chain = "eth";
  const auto v = validate_metadata(m);
  EXPECT_EQ(v.transfer_count(), 0u);
  EXPECT_TRUE(v.el.empty());
}

TEST(ValidateMetadata, Fig3KeepsBothTransfers) {
  const auto v = validate_metadata(fig3_metadata());
  ASSERT_EQ(v.et.size(), 1u);
  ASSERT_EQ(v.it.size(), 1u);
  EXPECT_EQ(v.et[0].from.hex(), kUser);
  EXPECT_EQ(v.et[0].to.hex(), kRouter);
  EXPECT_EQ(v.et[0].value, "500000000000000000");
  EXPECT_EQ(v.it[0].to.hex(), kWeth);
}

TEST(ValidateMetadata, MissingFieldsAndBadValues) {
  auto m = fig3_metadata();
  m.chain.clear();
  EXPECT_EQ(code_of([&] { validate_metadata(m); }), ErrorCode::FieldMissing);
  m = fig3_metadata();
  m.et[0].value = "-5";
  EXPECT_EQ(code_of([&] { validate_metadata(m); }), ErrorCode::MalformedValue);
  m = fig3_metadata();
  m.el[0].name.clear();
  EXPECT_EQ(code_of([&] { validate_metadata(m); }), ErrorCode::FieldMissing);
}

TEST(ValidateMetadata, NeverDropsRecords) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 50; ++k) {
    TransactionMetadata m;
    m.hash = tx_hash(k);
    m.chain = "eth";
    const int n = static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) m.et.push_back(transfer(address(i), address(i + 1), TransferKind::External));
    for (int i = 0; i < n / 2; ++i) m.erc20.push_back(transfer(address(i), address(i), TransferKind::Erc20, "0"));
    const auto v = validate_metadata(m);
    EXPECT_EQ(v.et.size(), m.et.size());
    EXPECT_EQ(v.erc20.size(), m.erc20.size());
  }
}

TEST(DecimalValue, HugeAmountsStayStrings) {
  EXPECT_TRUE(is_decimal_value("115792089237316195423570985008687907853269984665640564039457584007913129639935"));
  EXPECT_TRUE(is_decimal_value("0"));
  EXPECT_TRUE(is_decimal_value("0.5"));
  EXPECT_FALSE(is_decimal_value(""));
  EXPECT_FALSE(is_decimal_value("1e18"));
  EXPECT_FALSE(is_decimal_value(".5"));
}

TEST(Json, MetadataRoundTrip) {
  const auto m = validate_metadata(fig3_metadata());
  EXPECT_EQ(metadata_from_json(metadata_to_json(m)), m);
}

TEST(Json, RecordRoundTripKeepsLabel) {
  LabeledTransaction t{validate_metadata(fig3_metadata()), Label(TxClass::DT, "Across")};
  const auto j = record_to_json(t);
  EXPECT_EQ(j["label"], "DT");
  EXPECT_EQ(j["bridge"], "Across");
  EXPECT_EQ(record_from_json(j), t);

  LabeledTransaction pending{t.metadata, std::nullopt};
  EXPECT_FALSE(record_from_json(record_to_json(pending)).label);
}

TEST(Json, SchemaErrorsNameTheField) {
  auto j = metadata_to_json(validate_metadata(fig3_metadata()));
  j["et"][0]["to"] = "0x12";
  try {
    metadata_from_json(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaViolation);
    EXPECT_NE(std::string(e.what()).find("et[0].to"), std::string::npos);
  }
  j = metadata_to_json(validate_metadata(fig3_metadata()));
  j.erase("el");
  EXPECT_EQ(code_of([&] { metadata_from_json(j); }), ErrorCode::SchemaViolation);
}

TEST(Json, FormatRealRoundTrips) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> d(0.0, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = d(rng);
    EXPECT_EQ(std::stod(format_real(v)), v);
  }
  EXPECT_EQ(format_real(1.0), "1");
  EXPECT_EQ(format_real(0.75), "0.75");
}
