#include "xsema/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xsema/error.hpp"

namespace xsema {

namespace {

constexpr const char* kComponent = "classify";
constexpr double kMinGain = 1e-12;

using Tally = std::array<double, kNumClasses>;

double gini(const Tally& t, double total) {
  if (total <= 0) return 0.0;
  double s = 0;
  for (double c : t) s += (c / total) * (c / total);
  return 1.0 - s;
}

struct TreeBuilder {
  const Eigen::MatrixXd& x;
  std::span<const int> y;
  std::span<const double> w;
  const TreeParams& params;
  std::mt19937_64 rng;
  std::vector<DecisionTree::Node>& nodes;

  std::vector<int> candidate_features() {
    const int d = static_cast<int>(x.cols());
    std::vector<int> f(static_cast<std::size_t>(d));
    std::iota(f.begin(), f.end(), 0);
    if (params.max_features <= 0 || params.max_features >= d) return f;
    // Partial Fisher-Yates, then ascending so ties keep the lowest index.
    for (int i = 0; i < params.max_features; ++i) {
      std::uniform_int_distribution<int> pick(i, d - 1);
      std::swap(f[static_cast<std::size_t>(i)], f[static_cast<std::size_t>(pick(rng))]);
    }
    f.resize(static_cast<std::size_t>(params.max_features));
    std::sort(f.begin(), f.end());
    return f;
  }

  int build(std::vector<Eigen::Index>& idx, int depth) {
    DecisionTree::Node node;
    Tally tally{};
    for (auto i : idx) tally[static_cast<std::size_t>(y[static_cast<std::size_t>(i)])] += w[static_cast<std::size_t>(i)];
    node.distribution = tally;
    node.label = resolve_vote(tally);
    const double total = std::accumulate(tally.begin(), tally.end(), 0.0);
    const int at = static_cast<int>(nodes.size());
    nodes.push_back(node);

    const auto n = idx.size();
    const auto leaf = static_cast<std::size_t>(std::max(1, params.min_samples_leaf));
    const bool pure = std::count_if(tally.begin(), tally.end(), [](double c) { return c > 0; }) <= 1;
    if (depth >= params.max_depth || pure || n < 2 * leaf) return at;

    const double parent = gini(tally, total);
    double best_gain = kMinGain;
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<Eigen::Index> sorted = idx;
    for (int f : candidate_features()) {
      std::sort(sorted.begin(), sorted.end(), [&](Eigen::Index a, Eigen::Index b) {
        double xa = x(a, f), xb = x(b, f);
        return xa < xb || (xa == xb && a < b);
      });
      Tally left{};
      double left_total = 0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        auto i = static_cast<std::size_t>(sorted[k]);
        left[static_cast<std::size_t>(y[i])] += w[i];
        left_total += w[i];
        const double lo = x(sorted[k], f), hi = x(sorted[k + 1], f);
        if (!(lo < hi)) continue;
        if (k + 1 < leaf || n - (k + 1) < leaf) continue;
        Tally right;
        for (int c = 0; c < kNumClasses; ++c) right[c] = tally[c] - left[c];
        const double right_total = total - left_total;
        const double gain =
            parent - (left_total / total) * gini(left, left_total) - (right_total / total) * gini(right, right_total);
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_threshold = lo + (hi - lo) / 2;
        }
      }
    }
    if (best_feature < 0) return at;

    std::vector<Eigen::Index> li, ri;
    for (auto i : idx) (x(i, best_feature) <= best_threshold ? li : ri).push_back(i);
    idx.clear();
    idx.shrink_to_fit();
    const int l = build(li, depth + 1);
    const int r = build(ri, depth + 1);
    nodes[static_cast<std::size_t>(at)].feature = best_feature;
    nodes[static_cast<std::size_t>(at)].threshold = best_threshold;
    nodes[static_cast<std::size_t>(at)].left = l;
    nodes[static_cast<std::size_t>(at)].right = r;
    return at;
  }
};

nlohmann::json tally_json(const Tally& t) { return nlohmann::json::array({t[0], t[1], t[2]}); }

template <typename T>
T get_param(const nlohmann::json& h, const char* key, T fallback) {
  auto it = h.find(key);
  if (it == h.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::ConfigInvalid, kComponent, std::string("hyperparameter '") + key + "' has the wrong type");
  }
}

}  // namespace

std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::DecisionTree: return "decision-tree";
    case Algorithm::RandomForest: return "random-forest";
    case Algorithm::AdaBoost: return "adaboost";
    case Algorithm::LinearSvm: return "linear-svm";
  }
  return "random-forest";
}

std::optional<Algorithm> parse_algorithm(std::string_view s) noexcept {
  if (s == "decision-tree") return Algorithm::DecisionTree;
  if (s == "random-forest") return Algorithm::RandomForest;
  if (s == "adaboost") return Algorithm::AdaBoost;
  if (s == "linear-svm") return Algorithm::LinearSvm;
  return std::nullopt;
}

void ClassifierSpec::validate() const {
  auto bad = [](const char* what) { return Error(ErrorCode::ConfigInvalid, kComponent, what); };
  switch (algorithm) {
    case Algorithm::DecisionTree:
      if (tree.max_depth < 1 || tree.min_samples_leaf < 1 || tree.max_features < 0) throw bad("tree hyperparameters must be positive");
      break;
    case Algorithm::RandomForest:
      if (forest.n_trees < 1 || forest.max_depth < 1 || forest.min_samples_leaf < 1 || forest.max_features < 0) {
        throw bad("forest hyperparameters must be positive");
      }
      break;
    case Algorithm::AdaBoost:
      if (boost.n_estimators < 1) throw bad("n_estimators must be positive");
      break;
    case Algorithm::LinearSvm:
      if (!(svm.l2_penalty > 0) || svm.epochs < 1 || !(svm.learning_rate > 0)) throw bad("svm hyperparameters must be positive");
      break;
  }
}

nlohmann::json ClassifierSpec::to_json() const {
  nlohmann::json h;
  switch (algorithm) {
    case Algorithm::DecisionTree:
      h = {{"max_depth", tree.max_depth}, {"min_samples_leaf", tree.min_samples_leaf}, {"max_features", tree.max_features}};
      break;
    case Algorithm::RandomForest:
      h = {{"n_trees", forest.n_trees},
           {"bootstrap", forest.bootstrap},
           {"max_features", forest.max_features},
           {"max_depth", forest.max_depth},
           {"min_samples_leaf", forest.min_samples_leaf}};
      break;
    case Algorithm::AdaBoost:
      h = {{"n_estimators", boost.n_estimators}};
      break;
    case Algorithm::LinearSvm:
      h = {{"l2_penalty", svm.l2_penalty}, {"epochs", svm.epochs}, {"learning_rate", svm.learning_rate}};
      break;
  }
  return {{"algorithm", std::string(to_string(algorithm))}, {"hyperparams", h}, {"seed", seed}};
}

ClassifierSpec ClassifierSpec::from_json(const nlohmann::json& j) {
  ClassifierSpec s;
  auto name = j.value("algorithm", std::string(to_string(s.algorithm)));
  auto alg = parse_algorithm(name);
  if (!alg) throw Error(ErrorCode::ConfigInvalid, kComponent, "unknown algorithm '" + name + "'");
  s.algorithm = *alg;
  s.seed = j.value("seed", s.seed);
  const auto h = j.value("hyperparams", nlohmann::json::object());
  switch (s.algorithm) {
    case Algorithm::DecisionTree:
      s.tree.max_depth = get_param(h, "max_depth", s.tree.max_depth);
      s.tree.min_samples_leaf = get_param(h, "min_samples_leaf", s.tree.min_samples_leaf);
      s.tree.max_features = get_param(h, "max_features", s.tree.max_features);
      break;
    case Algorithm::RandomForest:
      s.forest.n_trees = get_param(h, "n_trees", s.forest.n_trees);
      s.forest.bootstrap = get_param(h, "bootstrap", s.forest.bootstrap);
      s.forest.max_features = get_param(h, "max_features", s.forest.max_features);
      s.forest.max_depth = get_param(h, "max_depth", s.forest.max_depth);
      s.forest.min_samples_leaf = get_param(h, "min_samples_leaf", s.forest.min_samples_leaf);
      break;
    case Algorithm::AdaBoost:
      s.boost.n_estimators = get_param(h, "n_estimators", s.boost.n_estimators);
      break;
    case Algorithm::LinearSvm:
      s.svm.l2_penalty = get_param(h, "l2_penalty", s.svm.l2_penalty);
      s.svm.epochs = get_param(h, "epochs", s.svm.epochs);
      s.svm.learning_rate = get_param(h, "learning_rate", s.svm.learning_rate);
      break;
  }
  s.validate();
  return s;
}

TxClass resolve_vote(const Tally& tally) noexcept {
  int best = 0;
  for (int k = 1; k < kNumClasses; ++k) {
    if (tally[static_cast<std::size_t>(k)] > tally[static_cast<std::size_t>(best)]) best = k;
  }
  return class_from_index(best);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

DecisionTree DecisionTree::fit(const Eigen::MatrixXd& x, std::span<const int> y, std::span<const double> weights,
                               const TreeParams& params, std::uint64_t seed) {
  DecisionTree t;
  TreeBuilder b{x, y, weights, params, std::mt19937_64(seed), t.nodes_};
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(x.rows()));
  std::iota(idx.begin(), idx.end(), 0);
  b.build(idx, 0);
  return t;
}

TxClass DecisionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  int at = 0;
  while (nodes_[static_cast<std::size_t>(at)].feature >= 0) {
    const auto& n = nodes_[static_cast<std::size_t>(at)];
    at = row[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes_[static_cast<std::size_t>(at)].label;
}

int DecisionTree::depth() const {
  std::vector<int> d(nodes_.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.feature < 0) continue;
    d[static_cast<std::size_t>(n.left)] = d[i] + 1;
    d[static_cast<std::size_t>(n.right)] = d[i] + 1;
    best = std::max(best, d[i] + 1);
  }
  return best;
}

bool operator==(const DecisionTree::Node& a, const DecisionTree::Node& b) {
  return a.feature == b.feature && a.threshold == b.threshold && a.left == b.left && a.right == b.right &&
         a.distribution == b.distribution && a.label == b.label;
}

bool operator==(const DecisionTree& a, const DecisionTree& b) { return a.nodes_ == b.nodes_; }

nlohmann::json DecisionTree::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& n : nodes_) {
    if (n.feature < 0) {
      arr.push_back({{"dist", tally_json(n.distribution)}, {"label", class_index(n.label)}});
    } else {
      arr.push_back({{"feature", n.feature},
                     {"threshold", n.threshold},
                     {"left", n.left},
                     {"right", n.right},
                     {"dist", tally_json(n.distribution)},
                     {"label", class_index(n.label)}});
    }
  }
  return arr;
}

DecisionTree DecisionTree::from_json(const nlohmann::json& j) {
  DecisionTree t;
  for (const auto& nj : j) {
    Node n;
    n.feature = nj.value("feature", -1);
    n.threshold = nj.value("threshold", 0.0);
    n.left = nj.value("left", -1);
    n.right = nj.value("right", -1);
    auto dist = nj.at("dist").get<std::vector<double>>();
    if (dist.size() != kNumClasses) throw Error(ErrorCode::CorruptBundle, kComponent, "bad node distribution");
    std::copy(dist.begin(), dist.end(), n.distribution.begin());
    n.label = class_from_index(nj.at("label").get<int>());
    t.nodes_.push_back(n);
  }
  const auto count = static_cast<int>(t.nodes_.size());
  if (count == 0) throw Error(ErrorCode::CorruptBundle, kComponent, "empty tree");
  for (const auto& n : t.nodes_) {
    if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count)) {
      throw Error(ErrorCode::CorruptBundle, kComponent, "tree child index out of range");
    }
  }
  return t;
}

TxClass RandomForest::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  Tally votes{};
  for (const auto& t : trees) votes[static_cast<std::size_t>(class_index(t.predict(row)))] += 1;
  return resolve_vote(votes);
}

TxClass AdaBoost::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  if (stumps.empty()) return fallback;
  Tally score{};
  for (std::size_t t = 0; t < stumps.size(); ++t) {
    score[static_cast<std::size_t>(class_index(stumps[t].predict(row)))] += alphas[t];
  }
  return resolve_vote(score);
}

TxClass LinearSvm::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  Eigen::VectorXd s = weights * row.transpose() + bias;
  Tally tally{s[0], s[1], s[2]};
  return resolve_vote(tally);
}

Classifier Classifier::fit(const ClassifierSpec& spec, const Eigen::MatrixXd& x, std::span<const TxClass> labels) {
  spec.validate();
  if (static_cast<Eigen::Index>(labels.size()) != x.rows()) {
    throw Error(ErrorCode::LengthMismatch, kComponent, "feature rows and labels differ in length");
  }
  if (!x.allFinite()) throw Error(ErrorCode::NonFiniteFeature, kComponent, "feature matrix has non-finite entries");
  std::vector<int> y(labels.size());
  std::transform(labels.begin(), labels.end(), y.begin(), [](TxClass c) { return class_index(c); });
  std::array<int, kNumClasses> present{};
  for (int c : y) present[static_cast<std::size_t>(c)] = 1;
  if (std::accumulate(present.begin(), present.end(), 0) < 2) {
    throw Error(ErrorCode::SingleClassInput, kComponent, "training data must contain at least two classes");
  }

  Classifier out;
  out.spec_ = spec;
  out.width_ = static_cast<int>(x.cols());
  const auto n = static_cast<std::size_t>(x.rows());
  const std::vector<double> unit(n, 1.0);

  switch (spec.algorithm) {
    case Algorithm::DecisionTree:
      out.model_ = DecisionTree::fit(x, y, unit, spec.tree, derive_seed(spec.seed, 0));
      break;

    case Algorithm::RandomForest: {
      TreeParams tp{spec.forest.max_depth, spec.forest.min_samples_leaf, spec.forest.max_features};
      if (tp.max_features == 0) {
        tp.max_features = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(x.cols())))));
      }
      RandomForest forest;
      for (int t = 0; t < spec.forest.n_trees; ++t) {
        const auto tree_seed = derive_seed(spec.seed, static_cast<std::uint64_t>(t));
        if (!spec.forest.bootstrap) {
          forest.trees.push_back(DecisionTree::fit(x, y, unit, tp, tree_seed));
          continue;
        }
        std::mt19937_64 rng(derive_seed(tree_seed, 0xb0075ULL));
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        Eigen::MatrixXd xs(x.rows(), x.cols());
        std::vector<int> ys(n);
        for (std::size_t i = 0; i < n; ++i) {
          auto r = pick(rng);
          xs.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(r));
          ys[i] = y[r];
        }
        forest.trees.push_back(DecisionTree::fit(xs, ys, unit, tp, tree_seed));
      }
      out.model_ = std::move(forest);
      break;
    }

    case Algorithm::AdaBoost: {
      constexpr double K = kNumClasses;
      AdaBoost boost;
      std::vector<double> w(n, 1.0 / static_cast<double>(n));
      Tally prior{};
      for (std::size_t i = 0; i < n; ++i) prior[static_cast<std::size_t>(y[i])] += w[i];
      boost.fallback = resolve_vote(prior);
      const TreeParams stump{1, 1, 0};
      for (int round = 0; round < spec.boost.n_estimators; ++round) {
        auto h = DecisionTree::fit(x, y, w, stump, derive_seed(spec.seed, static_cast<std::uint64_t>(round)));
        std::vector<char> miss(n);
        double err = 0;
        for (std::size_t i = 0; i < n; ++i) {
          miss[i] = class_index(h.predict(x.row(static_cast<Eigen::Index>(i)))) != y[i];
          if (miss[i]) err += w[i];
        }
        if (err >= 1.0 - 1.0 / K) break;
        const double clipped = std::max(err, 1e-10);
        const double alpha = std::log((1.0 - clipped) / clipped) + std::log(K - 1.0);
        boost.stumps.push_back(std::move(h));
        boost.alphas.push_back(alpha);
        if (err <= 0) {
          boost.weight_sums.push_back(std::accumulate(w.begin(), w.end(), 0.0));
          break;
        }
        const double boost_factor = std::exp(alpha);
        for (std::size_t i = 0; i < n; ++i) {
          if (miss[i]) w[i] *= boost_factor;
        }
        const double total = std::accumulate(w.begin(), w.end(), 0.0);
        for (auto& wi : w) wi /= total;
        boost.weight_sums.push_back(std::accumulate(w.begin(), w.end(), 0.0));
      }
      out.model_ = std::move(boost);
      break;
    }

    case Algorithm::LinearSvm: {
      LinearSvm svm;
      svm.weights = Eigen::MatrixXd::Zero(kNumClasses, x.cols());
      svm.bias = Eigen::VectorXd::Zero(kNumClasses);
      std::mt19937_64 rng(derive_seed(spec.seed, 0));
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      const double lr = spec.svm.learning_rate, lambda = spec.svm.l2_penalty;
      for (int epoch = 0; epoch < spec.svm.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (auto i : order) {
          const auto row = x.row(static_cast<Eigen::Index>(i));
          for (int k = 0; k < kNumClasses; ++k) {
            const double target = y[i] == k ? 1.0 : -1.0;
            const double margin = target * (svm.weights.row(k).dot(row) + svm.bias[k]);
            svm.weights.row(k) *= (1.0 - lr * lambda);
            if (margin < 1.0) {
              svm.weights.row(k) += lr * target * row;
              svm.bias[k] += lr * target;
            }
          }
        }
      }
      out.model_ = std::move(svm);
      break;
    }
  }
  return out;
}

std::vector<TxClass> Classifier::predict(const Eigen::MatrixXd& x) const {
  std::vector<TxClass> out;
  if (x.rows() == 0) return out;
  if (x.cols() != width_) {
    throw Error(ErrorCode::DimensionMismatch, kComponent,
                "feature width " + std::to_string(x.cols()) + " != trained width " + std::to_string(width_));
  }
  out.reserve(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    out.push_back(std::visit([&](const auto& m) { return m.predict(x.row(r)); }, model_));
  }
  return out;
}

nlohmann::json Classifier::to_json() const {
  nlohmann::json params;
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, DecisionTree>) {
          params = {{"tree", m.to_json()}};
        } else if constexpr (std::is_same_v<M, RandomForest>) {
          nlohmann::json trees = nlohmann::json::array();
          for (const auto& t : m.trees) trees.push_back(t.to_json());
          params = {{"trees", trees}};
        } else if constexpr (std::is_same_v<M, AdaBoost>) {
          nlohmann::json stumps = nlohmann::json::array();
          for (const auto& t : m.stumps) stumps.push_back(t.to_json());
          params = {{"stumps", stumps}, {"alphas", m.alphas}, {"fallback", class_index(m.fallback)}};
        } else {
          params = {{"rows", m.weights.rows()},
                    {"cols", m.weights.cols()},
                    {"weights", std::vector<double>(m.weights.data(), m.weights.data() + m.weights.size())},
                    {"bias", std::vector<double>(m.bias.data(), m.bias.data() + m.bias.size())}};
        }
      },
      model_);
  return {{"spec", spec_.to_json()}, {"width", width_}, {"params", params}};
}

Classifier Classifier::from_json(const nlohmann::json& j) {
  Classifier c;
  try {
    c.spec_ = ClassifierSpec::from_json(j.at("spec"));
    c.width_ = j.at("width").get<int>();
    const auto& p = j.at("params");
    switch (c.spec_.algorithm) {
      case Algorithm::DecisionTree:
        c.model_ = DecisionTree::from_json(p.at("tree"));
        break;
      case Algorithm::RandomForest: {
        RandomForest f;
        for (const auto& t : p.at("trees")) f.trees.push_back(DecisionTree::from_json(t));
        c.model_ = std::move(f);
        break;
      }
      case Algorithm::AdaBoost: {
        AdaBoost b;
        for (const auto& t : p.at("stumps")) b.stumps.push_back(DecisionTree::from_json(t));
        b.alphas = p.at("alphas").get<std::vector<double>>();
        b.fallback = class_from_index(p.at("fallback").get<int>());
        if (b.alphas.size() != b.stumps.size()) throw Error(ErrorCode::CorruptBundle, kComponent, "alpha count mismatch");
        c.model_ = std::move(b);
        break;
      }
      case Algorithm::LinearSvm: {
        LinearSvm s;
        auto rows = p.at("rows").get<Eigen::Index>();
        auto cols = p.at("cols").get<Eigen::Index>();
        auto w = p.at("weights").get<std::vector<double>>();
        auto b = p.at("bias").get<std::vector<double>>();
        if (rows != kNumClasses || static_cast<Eigen::Index>(w.size()) != rows * cols ||
            static_cast<Eigen::Index>(b.size()) != rows) {
          throw Error(ErrorCode::CorruptBundle, kComponent, "svm shape mismatch");
        }
        s.weights = Eigen::Map<const Eigen::MatrixXd>(w.data(), rows, cols);
        s.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), rows);
        c.model_ = std::move(s);
        break;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptBundle, kComponent, std::string("malformed classifier: ") + e.what());
  }
  return c;
}

}  // namespace xsema
