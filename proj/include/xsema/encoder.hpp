#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "xsema/core.hpp"
#include "xsema/eventtext.hpp"
#include "xsema/projection.hpp"

namespace xsema {

/// 16 rectified-linear activations from the projection head.
using MessageVector = Eigen::Matrix<double, ProjectionHead::kProjection, 1>;

/// Maps event texts to fixed-width real vectors. Implementations must be
/// deterministic per instance and safe to call from several threads.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual int dimension() const = 0;
  virtual std::vector<Eigen::VectorXd> embed_batch(const std::vector<std::string>& texts) const = 0;
  /// Enough to rebuild an equivalent provider with make_provider().
  virtual nlohmann::json descriptor() const = 0;
};

struct HashingEncoderConfig {
  int dimension = 512;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Signed feature hashing of subtokens, L2-normalized (zero stays zero).
Eigen::VectorXd hashing_embed(const TokenSeq& tokens, const HashingEncoderConfig& cfg);

class HashingProvider final : public EmbeddingProvider {
 public:
  explicit HashingProvider(HashingEncoderConfig cfg = {});
  int dimension() const override { return cfg_.dimension; }
  std::vector<Eigen::VectorXd> embed_batch(const std::vector<std::string>& texts) const override;
  nlohmann::json descriptor() const override;

 private:
  HashingEncoderConfig cfg_;
};

struct RemoteEncoderConfig {
  std::string base_url;
  int batch_size = 32;
  double timeout = 60.0;

  void validate() const;
};

struct RemoteInfo {
  std::string model;
  int dimension = 0;
};

RemoteInfo remote_info(const RemoteEncoderConfig& cfg);

/// Client for GET {base}/info and POST {base}/embed. Requests are chunked by
/// batch_size; an empty input sends nothing.
std::vector<Eigen::VectorXd> remote_embed(const RemoteEncoderConfig& cfg, const std::vector<std::string>& texts);

class RemoteProvider final : public EmbeddingProvider {
 public:
  /// Queries /info once to learn the dimension.
  explicit RemoteProvider(RemoteEncoderConfig cfg);
  int dimension() const override { return info_.dimension; }
  std::vector<Eigen::VectorXd> embed_batch(const std::vector<std::string>& texts) const override;
  nlohmann::json descriptor() const override;

 private:
  RemoteEncoderConfig cfg_;
  RemoteInfo info_;
};

/// {"kind": "hashing", "dimension", "seed"} or {"kind": "remote", "base_url", ...}.
std::unique_ptr<EmbeddingProvider> make_provider(const nlohmann::json& descriptor);

struct TrainingHyperparams {
  double learning_rate = 1e-3;
  int epochs = 30;
  int batch_size = 64;
  double l2_penalty = 1e-4;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainingHyperparams from_json(const nlohmann::json& j);
};

/// Mini-batch training of the [d_in, 64, 16, 3] head with cross-entropy + L2
/// using Adam steps. Deterministic for a given seed.
ProjectionHead train_projection(const Eigen::MatrixXd& embeddings, std::span<const TxClass> labels,
                                const TrainingHyperparams& hp);

MessageVector project(const ProjectionHead& head, const Eigen::VectorXd& embedding);

/// Fraction of rows whose softmax argmax matches the label.
double softmax_accuracy(const ProjectionHead& head, const Eigen::MatrixXd& x, std::span<const TxClass> labels);

/// Max relative error between analytic and central-difference gradients
/// (step 1e-5) over `samples` randomly chosen parameters.
double gradient_check(const ProjectionHead& head, const Eigen::MatrixXd& x, std::span<const TxClass> labels,
                      double l2 = 1e-4, int samples = 64, std::uint64_t seed = 0);

nlohmann::json head_to_json(const ProjectionHead& head);
ProjectionHead head_from_json(const nlohmann::json& j);

}  // namespace xsema
