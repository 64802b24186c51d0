#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "xsema/core.hpp"

namespace xsema {

enum class Algorithm { DecisionTree, RandomForest, AdaBoost, LinearSvm };

std::string_view to_string(Algorithm a) noexcept;
std::optional<Algorithm> parse_algorithm(std::string_view s) noexcept;

struct TreeParams {
  int max_depth = 12;
  int min_samples_leaf = 2;
  int max_features = 0;  // 0 = every feature
};

struct ForestParams {
  int n_trees = 100;
  bool bootstrap = true;
  int max_features = 0;  // 0 = floor(sqrt(d))
  int max_depth = 12;
  int min_samples_leaf = 2;
};

struct BoostParams {
  int n_estimators = 100;
};

struct SvmParams {
  double l2_penalty = 1e-3;
  int epochs = 50;
  double learning_rate = 1e-2;
};

struct ClassifierSpec {
  Algorithm algorithm = Algorithm::RandomForest;
  TreeParams tree;
  ForestParams forest;
  BoostParams boost;
  SvmParams svm;
  std::uint64_t seed = 0;

  void validate() const;
  /// {"algorithm": ..., "hyperparams": {...}, "seed": ...}; only the selected
  /// algorithm's hyperparameters are written.
  nlohmann::json to_json() const;
  static ClassifierSpec from_json(const nlohmann::json& j);
};

/// Highest tally wins; ties go to the lowest class index (NT < DT < WT).
TxClass resolve_vote(const std::array<double, kNumClasses>& tally) noexcept;

/// Per-tree / per-cell seed derivation.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// CART with Gini impurity and midpoint thresholds. Equal-gain candidates
/// resolve to the lowest feature index, then the lowest threshold.
class DecisionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::array<double, kNumClasses> distribution{};
    TxClass label = TxClass::NT;
  };

  static DecisionTree fit(const Eigen::MatrixXd& x, std::span<const int> y, std::span<const double> weights,
                          const TreeParams& params, std::uint64_t seed);

  TxClass predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  int depth() const;
  const std::vector<Node>& nodes() const noexcept { return nodes_; }

  nlohmann::json to_json() const;
  static DecisionTree from_json(const nlohmann::json& j);

  friend bool operator==(const DecisionTree&, const DecisionTree&);

 private:
  std::vector<Node> nodes_;
};

bool operator==(const DecisionTree::Node& a, const DecisionTree::Node& b);

struct RandomForest {
  std::vector<DecisionTree> trees;
  TxClass predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
};

/// Multiclass SAMME over depth-1 trees.
struct AdaBoost {
  std::vector<DecisionTree> stumps;
  std::vector<double> alphas;
  TxClass fallback = TxClass::NT;
  /// Sum of the sample weights after each round (diagnostic).
  std::vector<double> weight_sums;
  TxClass predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
};

/// One-vs-rest linear SVM trained by stochastic subgradient descent on the
/// L2-regularized hinge loss.
struct LinearSvm {
  Eigen::MatrixXd weights;  // classes x features
  Eigen::VectorXd bias;
  TxClass predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
};

class Classifier {
 public:
  using Model = std::variant<DecisionTree, RandomForest, AdaBoost, LinearSvm>;

  /// Throws ErrorCode::SingleClassInput, NonFiniteFeature, LengthMismatch.
  static Classifier fit(const ClassifierSpec& spec, const Eigen::MatrixXd& x, std::span<const TxClass> y);

  /// Throws ErrorCode::DimensionMismatch when the column count differs from
  /// the training width.
  std::vector<TxClass> predict(const Eigen::MatrixXd& x) const;

  const ClassifierSpec& spec() const noexcept { return spec_; }
  int width() const noexcept { return width_; }
  const Model& model() const noexcept { return model_; }

  nlohmann::json to_json() const;
  static Classifier from_json(const nlohmann::json& j);

 private:
  ClassifierSpec spec_;
  int width_ = 0;
  Model model_;
};

}  // namespace xsema
