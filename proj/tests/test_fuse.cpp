#include <gtest/gtest.h>

#include <random>

#include "xsema/fuse.hpp"

using namespace xsema;

TEST(Scaler, IdenticalRowsKeepUnitStd) {
  Eigen::MatrixXd x(4, 3);
  x.rowwise() = Eigen::RowVector3d(0.1, -7.0, 3.0);
  const auto s = fit_scaler(x);
  EXPECT_EQ(s.means, Eigen::Vector3d(0.1, -7.0, 3.0));
  EXPECT_EQ(s.stds, Eigen::Vector3d::Ones());
}

TEST(Scaler, TwoRowsHandComputed) {
  Eigen::MatrixXd x(2, 2);
  x << 0.0, 5.0, 2.0, 5.0;
  const auto s = fit_scaler(x);
  EXPECT_DOUBLE_EQ(s.means[0], 1.0);
  EXPECT_DOUBLE_EQ(s.stds[0], 1.0);
  EXPECT_DOUBLE_EQ(s.means[1], 5.0);
  EXPECT_DOUBLE_EQ(s.stds[1], 1.0);
}

TEST(Scaler, EmptyTrain) {
  try {
    fit_scaler(Eigen::MatrixXd(0, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyTrain);
  }
}

TEST(Scaler, UnfittedAndWidthErrors) {
  FeatureScaler s;
  try {
    s.transform(Eigen::MatrixXd::Zero(1, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnfittedScaler);
  }
  s = fit_scaler(Eigen::MatrixXd::Ones(2, 3).eval());
  try {
    s.transform(Eigen::MatrixXd::Zero(1, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(Scaler, StandardizedStatistics) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> d(3.0, 10.0);
  Eigen::MatrixXd x(150, kFusedWidth);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = j == 5 ? 4.0 : (j < kMotifSlots ? std::round(std::abs(d(rng))) : d(rng));
  }
  const auto s = fit_scaler(x);
  const Eigen::MatrixXd z = s.transform(x);
  const double n = static_cast<double>(z.rows());
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double mean = z.col(j).sum() / n;
    const double sd = std::sqrt((z.col(j).array() - mean).square().sum() / n);
    EXPECT_LT(std::abs(mean), 1e-9) << j;
    if (j == 5) {
      EXPECT_EQ(z.col(j).cwiseAbs().maxCoeff(), 0.0);
    } else {
      EXPECT_LT(std::abs(sd - 1.0), 1e-9) << j;
    }
  }
  EXPECT_LT((s.inverse_transform(z) - x).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + x.cwiseAbs().maxCoeff()));
}

TEST(Fuse, ZeroInputIdentityScaler) {
  FeatureScaler s;
  s.means = Eigen::VectorXd::Zero(kFusedWidth);
  s.stds = Eigen::VectorXd::Ones(kFusedWidth);
  EXPECT_EQ(fuse(MotifVector::Zero(), MessageVector::Zero(), s), FusedVector::Zero());
}

TEST(Fuse, SlotOrdering) {
  MotifVector ft = MotifVector::Zero();
  ft(1) = 7;
  MessageVector mp = MessageVector::Zero();
  mp(0) = 0.5;
  const auto raw = concat_features(ft, mp);
  EXPECT_EQ(raw(1), 7.0);
  EXPECT_EQ(raw(kMotifSlots), 0.5);
  EXPECT_EQ(raw.sum(), 7.5);
}

TEST(Fuse, AffinePerCoordinateAndInvertible) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  Eigen::MatrixXd train(20, kFusedWidth);
  for (Eigen::Index i = 0; i < train.size(); ++i) train.data()[i] = u(rng);
  const auto s = fit_scaler(train);
  for (int k = 0; k < 20; ++k) {
    MotifVector ft;
    for (int i = 0; i < kMotifSlots; ++i) ft(i) = static_cast<std::int64_t>(rng() % 9);
    MessageVector mp;
    for (int i = 0; i < mp.size(); ++i) mp(i) = std::abs(u(rng));
    const auto z = fuse(ft, mp, s);
    const Eigen::MatrixXd back = s.inverse_transform(z.transpose());
    const FusedVector raw = concat_features(ft, mp);
    EXPECT_LT((back.transpose() - raw).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + raw.cwiseAbs().maxCoeff()));
  }
}

TEST(Fuse, ScalerJsonRoundTrip) {
  Eigen::MatrixXd x(3, 4);
  x << 1, 2, 3, 4, 0.1, 0.2, 0.3, 0.4, -1, -2, -3, 1e-17;
  const auto s = fit_scaler(x);
  EXPECT_EQ(scaler_from_json(scaler_to_json(s)), s);
}
