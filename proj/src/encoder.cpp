#include "xsema/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "http_util.hpp"

namespace xsema {

namespace {

constexpr const char* kComponent = "encoder";

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t token_hash(std::string_view token, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ splitmix64(seed);
  for (unsigned char c : token) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h);
}

std::vector<int> class_indices(std::span<const TxClass> labels) {
  std::vector<int> out(labels.size());
  std::transform(labels.begin(), labels.end(), out.begin(), [](TxClass c) { return class_index(c); });
  return out;
}

}  // namespace

void HashingEncoderConfig::validate() const {
  if (dimension < ProjectionHead::kProjection) {
    throw Error(ErrorCode::ConfigInvalid, kComponent, "hashing dimension must be >= 16");
  }
}

Eigen::VectorXd hashing_embed(const TokenSeq& tokens, const HashingEncoderConfig& cfg) {
  cfg.validate();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(cfg.dimension);
  for (const auto& tok : tokens.tokens) {
    auto h = token_hash(tok, cfg.seed);
    auto bucket = static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(cfg.dimension));
    double sign = (splitmix64(h) >> 63) ? -1.0 : 1.0;
    v[bucket] += sign;
  }
  double norm = v.norm();
  if (norm > 0) v /= norm;
  return v;
}

HashingProvider::HashingProvider(HashingEncoderConfig cfg) : cfg_(cfg) { cfg_.validate(); }

std::vector<Eigen::VectorXd> HashingProvider::embed_batch(const std::vector<std::string>& texts) const {
  std::vector<Eigen::VectorXd> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(hashing_embed(tokenize(t), cfg_));
  return out;
}

nlohmann::json HashingProvider::descriptor() const {
  return {{"kind", "hashing"}, {"dimension", cfg_.dimension}, {"seed", cfg_.seed}};
}

void RemoteEncoderConfig::validate() const {
  if (base_url.empty()) throw Error(ErrorCode::ConfigInvalid, kComponent, "remote base_url is empty");
  if (batch_size < 1) throw Error(ErrorCode::ConfigInvalid, kComponent, "batch_size must be >= 1");
  if (!(timeout > 0)) throw Error(ErrorCode::ConfigInvalid, kComponent, "timeout must be > 0");
}

namespace {

nlohmann::json parse_reply(const httplib::Result& res, const std::string& what) {
  if (!res) {
    throw Error(ErrorCode::NetworkError, kComponent, what + ": " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    std::string detail;
    try {
      detail = nlohmann::json::parse(res->body).value("error", std::string{});
    } catch (const nlohmann::json::exception&) {
      detail = res->body;
    }
    throw Error(ErrorCode::ServerError, kComponent,
                what + ": status " + std::to_string(res->status) + (detail.empty() ? "" : ": " + detail));
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ServerError, kComponent, what + ": malformed body: " + e.what());
  }
}

}  // namespace

RemoteInfo remote_info(const RemoteEncoderConfig& cfg) {
  cfg.validate();
  auto [base, path] = detail::split_url(cfg.base_url);
  httplib::Client cli(base);
  detail::set_timeouts(cli, cfg.timeout);
  auto j = parse_reply(cli.Get(detail::join_path(path, "/info")), "GET /info");
  RemoteInfo info;
  try {
    info.model = j.at("model").get<std::string>();
    info.dimension = j.at("dimension").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ServerError, kComponent, std::string("GET /info: ") + e.what());
  }
  if (info.dimension < 1) throw Error(ErrorCode::ServerError, kComponent, "GET /info: non-positive dimension");
  return info;
}

namespace {

std::vector<Eigen::VectorXd> embed_chunks(const RemoteEncoderConfig& cfg, int dimension,
                                          const std::vector<std::string>& texts) {
  std::vector<Eigen::VectorXd> out;
  if (texts.empty()) return out;
  out.reserve(texts.size());
  auto [base, path] = detail::split_url(cfg.base_url);
  httplib::Client cli(base);
  detail::set_timeouts(cli, cfg.timeout);
  const auto embed_path = detail::join_path(path, "/embed");
  for (std::size_t start = 0; start < texts.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
    auto end = std::min(texts.size(), start + static_cast<std::size_t>(cfg.batch_size));
    nlohmann::json body = {{"texts", std::vector<std::string>(texts.begin() + start, texts.begin() + end)}};
    auto j = parse_reply(cli.Post(embed_path, body.dump(), "application/json"), "POST /embed");
    auto rows = j.find("embeddings");
    if (rows == j.end() || !rows->is_array() || rows->size() != end - start) {
      throw Error(ErrorCode::ServerError, kComponent, "POST /embed: expected one embedding per text");
    }
    for (const auto& row : *rows) {
      if (!row.is_array() || static_cast<int>(row.size()) != dimension) {
        throw Error(ErrorCode::DimensionMismatch, kComponent,
                    "embedding has " + std::to_string(row.is_array() ? row.size() : 0) + " entries, /info says " +
                        std::to_string(dimension));
      }
      Eigen::VectorXd v(dimension);
      for (int i = 0; i < dimension; ++i) v[i] = row[i].get<double>();
      out.push_back(std::move(v));
    }
  }
  return out;
}

}  // namespace

std::vector<Eigen::VectorXd> remote_embed(const RemoteEncoderConfig& cfg, const std::vector<std::string>& texts) {
  cfg.validate();
  if (texts.empty()) return {};
  return embed_chunks(cfg, remote_info(cfg).dimension, texts);
}

RemoteProvider::RemoteProvider(RemoteEncoderConfig cfg) : cfg_(std::move(cfg)), info_(remote_info(cfg_)) {}

std::vector<Eigen::VectorXd> RemoteProvider::embed_batch(const std::vector<std::string>& texts) const {
  return embed_chunks(cfg_, info_.dimension, texts);
}

nlohmann::json RemoteProvider::descriptor() const {
  return {{"kind", "remote"},        {"base_url", cfg_.base_url}, {"batch_size", cfg_.batch_size},
          {"timeout", cfg_.timeout}, {"model", info_.model},     {"dimension", info_.dimension}};
}

std::unique_ptr<EmbeddingProvider> make_provider(const nlohmann::json& d) {
  auto kind = d.value("kind", std::string("hashing"));
  if (kind == "hashing") {
    HashingEncoderConfig cfg;
    cfg.dimension = d.value("dimension", cfg.dimension);
    cfg.seed = d.value("seed", cfg.seed);
    return std::make_unique<HashingProvider>(cfg);
  }
  if (kind == "remote") {
    RemoteEncoderConfig cfg;
    cfg.base_url = d.value("base_url", std::string{});
    cfg.batch_size = d.value("batch_size", cfg.batch_size);
    cfg.timeout = d.value("timeout", cfg.timeout);
    auto provider = std::make_unique<RemoteProvider>(cfg);
    if (auto dim = d.find("dimension"); dim != d.end() && dim->get<int>() != provider->dimension()) {
      throw Error(ErrorCode::DimensionMismatch, kComponent, "remote provider dimension changed since training");
    }
    return provider;
  }
  throw Error(ErrorCode::ConfigInvalid, kComponent, "unknown provider kind '" + kind + "'");
}

void TrainingHyperparams::validate() const {
  if (!(learning_rate > 0) || epochs < 1 || batch_size < 1 || !(l2_penalty > 0)) {
    throw Error(ErrorCode::ConfigInvalid, kComponent, "training hyperparameters must be positive");
  }
}

nlohmann::json TrainingHyperparams::to_json() const {
  return {{"learning_rate", learning_rate}, {"epochs", epochs}, {"batch_size", batch_size},
          {"l2_penalty", l2_penalty},       {"seed", seed}};
}

TrainingHyperparams TrainingHyperparams::from_json(const nlohmann::json& j) {
  TrainingHyperparams hp;
  hp.learning_rate = j.value("learning_rate", hp.learning_rate);
  hp.epochs = j.value("epochs", hp.epochs);
  hp.batch_size = j.value("batch_size", hp.batch_size);
  hp.l2_penalty = j.value("l2_penalty", hp.l2_penalty);
  hp.seed = j.value("seed", hp.seed);
  hp.validate();
  return hp;
}

ProjectionHead train_projection(const Eigen::MatrixXd& x, std::span<const TxClass> labels,
                                const TrainingHyperparams& hp) {
  hp.validate();
  if (static_cast<Eigen::Index>(labels.size()) != x.rows()) {
    throw Error(ErrorCode::LengthMismatch, kComponent, "embedding rows and labels differ in length");
  }
  std::array<int, kNumClasses> per_class{};
  for (auto c : labels) ++per_class[class_index(c)];
  for (int k = 0; k < kNumClasses; ++k) {
    if (per_class[k] == 0) {
      throw Error(ErrorCode::MissingClass, kComponent,
                  "no training samples for class " + std::string(to_string(class_from_index(k))));
    }
  }
  if (!x.allFinite()) throw Error(ErrorCode::NonFiniteInput, kComponent, "embedding matrix has non-finite entries");

  const auto y = class_indices(labels);
  ProjectionHead head = ProjectionHead::initialize(static_cast<int>(x.cols()), hp.seed);
  ProjectionHead stable = head;

  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  const std::size_t np = head.parameter_count();
  std::vector<double> m1(np, 0.0), m2(np, 0.0), grad(np);
  std::mt19937_64 rng(hp.seed ^ 0x5eed5eedULL);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), 0);
  std::int64_t step = 0;

  for (int epoch = 1; epoch <= hp.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(hp.batch_size)) {
      auto end = std::min(order.size(), start + static_cast<std::size_t>(hp.batch_size));
      Eigen::MatrixXd batch(static_cast<Eigen::Index>(end - start), x.cols());
      std::vector<int> by(end - start);
      for (std::size_t i = start; i < end; ++i) {
        batch.row(static_cast<Eigen::Index>(i - start)) = x.row(order[i]);
        by[i - start] = y[static_cast<std::size_t>(order[i])];
      }
      auto g = head.gradients(batch, by, hp.l2_penalty);
      if (!std::isfinite(g.loss)) {
        throw Error(ErrorCode::Divergence, kComponent,
                    "loss became non-finite in epoch " + std::to_string(epoch) + "; last stable epoch " +
                        std::to_string(epoch - 1));
      }
      std::size_t p = 0;
      for (int l = 0; l < ProjectionHead::kLayers; ++l) {
        for (Eigen::Index i = 0; i < g.weights[l].size(); ++i) grad[p++] = g.weights[l].data()[i];
        for (Eigen::Index i = 0; i < g.biases[l].size(); ++i) grad[p++] = g.biases[l].data()[i];
      }
      ++step;
      const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      for (std::size_t i = 0; i < np; ++i) {
        m1[i] = beta1 * m1[i] + (1 - beta1) * grad[i];
        m2[i] = beta2 * m2[i] + (1 - beta2) * grad[i] * grad[i];
        head.parameter(i) -= hp.learning_rate * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + eps);
      }
    }
    for (std::size_t i = 0; i < np; ++i) {
      if (!std::isfinite(head.parameter(i))) {
        throw Error(ErrorCode::Divergence, kComponent,
                    "parameters became non-finite in epoch " + std::to_string(epoch) + "; last stable epoch " +
                        std::to_string(epoch - 1));
      }
    }
    stable = head;
  }
  return stable;
}

MessageVector project(const ProjectionHead& head, const Eigen::VectorXd& embedding) {
  if (embedding.size() != head.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, kComponent,
                "embedding has " + std::to_string(embedding.size()) + " entries, head expects " +
                    std::to_string(head.input_dim()));
  }
  return head.project(embedding);
}

double softmax_accuracy(const ProjectionHead& head, const Eigen::MatrixXd& x, std::span<const TxClass> labels) {
  if (x.rows() == 0) return 0.0;
  auto a = head.forward(x);
  std::size_t hits = 0;
  for (Eigen::Index r = 0; r < a.probs.rows(); ++r) {
    Eigen::Index best;
    a.probs.row(r).maxCoeff(&best);
    hits += static_cast<int>(best) == class_index(labels[static_cast<std::size_t>(r)]);
  }
  return static_cast<double>(hits) / static_cast<double>(x.rows());
}

double gradient_check(const ProjectionHead& head, const Eigen::MatrixXd& x, std::span<const TxClass> labels,
                      double l2, int samples, std::uint64_t seed) {
  const auto y = class_indices(labels);
  const auto g = head.gradients(x, y, l2);
  std::vector<double> analytic;
  analytic.reserve(head.parameter_count());
  for (int l = 0; l < ProjectionHead::kLayers; ++l) {
    analytic.insert(analytic.end(), g.weights[l].data(), g.weights[l].data() + g.weights[l].size());
    analytic.insert(analytic.end(), g.biases[l].data(), g.biases[l].data() + g.biases[l].size());
  }

  constexpr double h = 1e-5;
  // Absolute floor on the denominator keeps parameters with (near-)zero
  // gradient from dividing round-off by round-off.
  constexpr double floor = 1e-6;
  ProjectionHead probe = head;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, head.parameter_count() - 1);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    auto i = pick(rng);
    const double original = probe.parameter(i);
    probe.parameter(i) = original + h;
    const double up = probe.loss(x, y, l2);
    probe.parameter(i) = original - h;
    const double down = probe.loss(x, y, l2);
    probe.parameter(i) = original;
    const double numeric = (up - down) / (2 * h);
    const double err = std::abs(numeric - analytic[i]) / std::max(std::abs(numeric) + std::abs(analytic[i]), floor);
    worst = std::max(worst, err);
  }
  return worst;
}

nlohmann::json head_to_json(const ProjectionHead& head) {
  nlohmann::json layers = nlohmann::json::array();
  for (int l = 0; l < ProjectionHead::kLayers; ++l) {
    const auto& w = head.weights[l];
    const auto& b = head.biases[l];
    layers.push_back({{"rows", w.rows()},
                      {"cols", w.cols()},
                      {"weights", std::vector<double>(w.data(), w.data() + w.size())},
                      {"bias", std::vector<double>(b.data(), b.data() + b.size())}});
  }
  return {{"layer_sizes", {head.input_dim(), ProjectionHead::kHidden, ProjectionHead::kProjection,
                           ProjectionHead::kClasses}},
          {"activation", "relu"},
          {"layers", layers}};
}

ProjectionHead head_from_json(const nlohmann::json& j) {
  ProjectionHead head;
  const auto& layers = j.at("layers");
  if (layers.size() != ProjectionHead::kLayers) {
    throw Error(ErrorCode::CorruptBundle, kComponent, "projection head must have 3 layers");
  }
  for (int l = 0; l < ProjectionHead::kLayers; ++l) {
    const auto& lj = layers[static_cast<std::size_t>(l)];
    auto rows = lj.at("rows").get<Eigen::Index>();
    auto cols = lj.at("cols").get<Eigen::Index>();
    auto w = lj.at("weights").get<std::vector<double>>();
    auto b = lj.at("bias").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(w.size()) != rows * cols || static_cast<Eigen::Index>(b.size()) != rows) {
      throw Error(ErrorCode::CorruptBundle, kComponent, "projection layer shape mismatch");
    }
    head.weights[l] = Eigen::Map<const Eigen::MatrixXd>(w.data(), rows, cols);
    head.biases[l] = Eigen::Map<const Eigen::VectorXd>(b.data(), rows);
  }
  return head;
}

}  // namespace xsema
