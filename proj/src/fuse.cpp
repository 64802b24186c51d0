#include "xsema/fuse.hpp"

namespace xsema {

FusedVector fuse(const MotifVector& v_ft, const MessageVector& v_mp, const FeatureScaler& scaler) {
  Eigen::MatrixXd row = concat_features(v_ft, v_mp).transpose();
  return scaler.transform(row).row(0).transpose();
}

nlohmann::json scaler_to_json(const FeatureScaler& s) {
  return {{"means", std::vector<double>(s.means.data(), s.means.data() + s.means.size())},
          {"stds", std::vector<double>(s.stds.data(), s.stds.data() + s.stds.size())}};
}

FeatureScaler scaler_from_json(const nlohmann::json& j) {
  auto means = j.at("means").get<std::vector<double>>();
  auto stds = j.at("stds").get<std::vector<double>>();
  if (means.size() != stds.size() || means.empty()) {
    throw Error(ErrorCode::CorruptBundle, "fuse", "scaler means/stds length mismatch");
  }
  FeatureScaler s;
  s.means = Eigen::Map<const Eigen::VectorXd>(means.data(), static_cast<Eigen::Index>(means.size()));
  s.stds = Eigen::Map<const Eigen::VectorXd>(stds.data(), static_cast<Eigen::Index>(stds.size()));
  return s;
}

}  // namespace xsema
