#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "xsema/encoder.hpp"
#include "xsema/error.hpp"
#include "xsema/motif.hpp"

namespace xsema {

inline constexpr int kFusedWidth = kMotifSlots + ProjectionHead::kProjection;

/// [motif counts | message activations], standardized.
using FusedVector = Eigen::Matrix<double, kFusedWidth, 1>;

/// Per-coordinate standardization fitted on a training matrix (one sample
/// per row). Coordinates with zero spread keep std = 1.
template <typename Scalar>
struct FeatureScalerT {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Vector means;
  Vector stds;

  bool fitted() const noexcept { return means.size() > 0 && means.size() == stds.size(); }
  Eigen::Index width() const noexcept { return means.size(); }

  Matrix transform(const Matrix& x) const {
    check(x.cols());
    return (x.rowwise() - means.transpose()).array().rowwise() / stds.transpose().array();
  }

  Matrix inverse_transform(const Matrix& z) const {
    check(z.cols());
    return (z.array().rowwise() * stds.transpose().array()).matrix().rowwise() + means.transpose();
  }

  friend bool operator==(const FeatureScalerT& a, const FeatureScalerT& b) {
    return a.means.size() == b.means.size() && a.means == b.means && a.stds == b.stds;
  }

 private:
  void check(Eigen::Index cols) const {
    if (!fitted()) throw Error(ErrorCode::UnfittedScaler, "fuse", "scaler has not been fitted");
    if (cols != means.size()) {
      throw Error(ErrorCode::DimensionMismatch, "fuse",
                  "feature width " + std::to_string(cols) + " != scaler width " + std::to_string(means.size()));
    }
  }
};

using FeatureScaler = FeatureScalerT<double>;

/// Population mean and std per column; the mean is accumulated as an offset
/// from the first row so identical rows reproduce exactly.
template <typename Scalar>
FeatureScalerT<Scalar> fit_scaler(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& train) {
  if (train.rows() == 0) throw Error(ErrorCode::EmptyTrain, "fuse", "cannot fit a scaler on zero rows");
  const Scalar n = static_cast<Scalar>(train.rows());
  FeatureScalerT<Scalar> s;
  const auto anchor = train.row(0);
  s.means = (anchor + (train.rowwise() - anchor).colwise().sum() / n).transpose();
  s.stds = ((train.rowwise() - s.means.transpose()).array().square().colwise().sum() / n).sqrt().matrix().transpose();
  for (Eigen::Index i = 0; i < s.stds.size(); ++i) {
    if (!(s.stds[i] > Scalar(0))) s.stds[i] = Scalar(1);
  }
  return s;
}

/// Raw concatenation, motif slots first.
inline FusedVector concat_features(const MotifVector& v_ft, const MessageVector& v_mp) {
  FusedVector out;
  out.head<kMotifSlots>() = v_ft.cast<double>();
  out.tail<ProjectionHead::kProjection>() = v_mp;
  return out;
}

FusedVector fuse(const MotifVector& v_ft, const MessageVector& v_mp, const FeatureScaler& scaler);

nlohmann::json scaler_to_json(const FeatureScaler& s);
FeatureScaler scaler_from_json(const nlohmann::json& j);

}  // namespace xsema
