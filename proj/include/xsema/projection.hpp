#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>

#include <Eigen/Core>

#include "xsema/error.hpp"

namespace xsema {

/// Feed-forward head [d_in, 64, 16, 3] with rectified-linear hidden layers.
/// The 3-way softmax output exists for training only; the 16 penultimate
/// activations are the message-passing representation.
///
/// Data matrices hold one sample per row.
template <typename Scalar>
class ProjectionHeadT {
 public:
  static constexpr int kHidden = 64;
  static constexpr int kProjection = 16;
  static constexpr int kClasses = 3;
  static constexpr int kLayers = 3;
  static constexpr double kHiddenBias = 0.01;

  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

  /// Layer l maps width(l) -> width(l+1): weights[l] is out x in.
  std::array<Matrix, kLayers> weights;
  std::array<Vector, kLayers> biases;

  ProjectionHeadT() = default;

  /// He-normal weights. Hidden biases start at kHiddenBias so a zero input
  /// does not sit on the rectifier kink; the output bias starts at zero.
  static ProjectionHeadT initialize(int input_dim, std::uint64_t seed) {
    ProjectionHeadT h;
    const std::array<int, 4> widths{input_dim, kHidden, kProjection, kClasses};
    std::mt19937_64 rng(seed);
    for (int l = 0; l < kLayers; ++l) {
      std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / widths[l]));
      h.weights[l] = Matrix(widths[l + 1], widths[l]);
      for (Eigen::Index j = 0; j < h.weights[l].cols(); ++j) {
        for (Eigen::Index i = 0; i < h.weights[l].rows(); ++i) h.weights[l](i, j) = static_cast<Scalar>(dist(rng));
      }
      h.biases[l] = Vector::Constant(widths[l + 1], l + 1 < kLayers ? Scalar(kHiddenBias) : Scalar(0));
    }
    return h;
  }

  int input_dim() const noexcept { return static_cast<int>(weights[0].cols()); }

  struct Activations {
    Matrix z1, h1, z2, h2, logits, probs;
  };

  Activations forward(const Matrix& x) const {
    check_width(x.cols());
    Activations a;
    a.z1 = (x * weights[0].transpose()).rowwise() + biases[0].transpose();
    a.h1 = a.z1.cwiseMax(Scalar(0));
    a.z2 = (a.h1 * weights[1].transpose()).rowwise() + biases[1].transpose();
    a.h2 = a.z2.cwiseMax(Scalar(0));
    a.logits = (a.h2 * weights[2].transpose()).rowwise() + biases[2].transpose();
    a.probs = a.logits;
    for (Eigen::Index r = 0; r < a.probs.rows(); ++r) {
      auto row = a.probs.row(r);
      Scalar m = row.maxCoeff();
      row = (row.array() - m).exp().matrix();
      row /= row.sum();
    }
    return a;
  }

  /// Penultimate activations, one 16-vector per row.
  Matrix project(const Matrix& x) const {
    check_width(x.cols());
    Matrix z1 = (x * weights[0].transpose()).rowwise() + biases[0].transpose();
    Matrix z2 = (z1.cwiseMax(Scalar(0)) * weights[1].transpose()).rowwise() + biases[1].transpose();
    return z2.cwiseMax(Scalar(0));
  }

  Vector project(const Vector& embedding) const {
    Matrix x = embedding.transpose();
    return project(x).row(0).transpose();
  }

  /// Mean cross-entropy plus (l2 / 2) * sum of squared weights.
  Scalar loss(const Matrix& x, std::span<const int> labels, Scalar l2) const {
    return loss_from(forward(x), labels, l2);
  }

  struct Gradients {
    std::array<Matrix, kLayers> weights;
    std::array<Vector, kLayers> biases;
    Scalar loss;
  };

  Gradients gradients(const Matrix& x, std::span<const int> labels, Scalar l2) const {
    const Activations a = forward(x);
    const Scalar n = static_cast<Scalar>(x.rows());
    Gradients g;
    g.loss = loss_from(a, labels, l2);

    Matrix d3 = a.probs;
    for (Eigen::Index r = 0; r < d3.rows(); ++r) d3(r, labels[r]) -= Scalar(1);
    d3 /= n;
    g.weights[2] = d3.transpose() * a.h2 + l2 * weights[2];
    g.biases[2] = d3.colwise().sum().transpose();

    Matrix d2 = (d3 * weights[2]).cwiseProduct(relu_mask(a.z2));
    g.weights[1] = d2.transpose() * a.h1 + l2 * weights[1];
    g.biases[1] = d2.colwise().sum().transpose();

    Matrix d1 = (d2 * weights[1]).cwiseProduct(relu_mask(a.z1));
    g.weights[0] = d1.transpose() * x + l2 * weights[0];
    g.biases[0] = d1.colwise().sum().transpose();
    return g;
  }

  /// Flat view used by optimizers and gradient checking: layer by layer,
  /// weights (column-major) then biases.
  std::size_t parameter_count() const noexcept {
    std::size_t n = 0;
    for (int l = 0; l < kLayers; ++l) n += weights[l].size() + biases[l].size();
    return n;
  }

  Scalar& parameter(std::size_t i) { return locate(*this, i); }
  Scalar parameter(std::size_t i) const { return locate(const_cast<ProjectionHeadT&>(*this), i); }

  friend bool operator==(const ProjectionHeadT& a, const ProjectionHeadT& b) {
    for (int l = 0; l < kLayers; ++l) {
      if (a.weights[l].rows() != b.weights[l].rows() || a.weights[l].cols() != b.weights[l].cols()) return false;
      if (a.weights[l] != b.weights[l] || a.biases[l] != b.biases[l]) return false;
    }
    return true;
  }

 private:
  static Matrix relu_mask(const Matrix& z) { return (z.array() > Scalar(0)).template cast<Scalar>().matrix(); }

  Scalar loss_from(const Activations& a, std::span<const int> labels, Scalar l2) const {
    if (static_cast<Eigen::Index>(labels.size()) != a.probs.rows()) {
      throw Error(ErrorCode::LengthMismatch, "encoder", "label count does not match batch size");
    }
    Scalar ce = 0;
    for (Eigen::Index r = 0; r < a.logits.rows(); ++r) {
      // log-softmax from logits for stability
      Scalar m = a.logits.row(r).maxCoeff();
      Scalar lse = m + std::log((a.logits.row(r).array() - m).exp().sum());
      ce += lse - a.logits(r, labels[r]);
    }
    ce /= static_cast<Scalar>(a.logits.rows());
    Scalar reg = 0;
    for (int l = 0; l < kLayers; ++l) reg += weights[l].squaredNorm();
    return ce + Scalar(0.5) * l2 * reg;
  }

  void check_width(Eigen::Index cols) const {
    if (cols != weights[0].cols()) {
      throw Error(ErrorCode::DimensionMismatch, "encoder",
                  "embedding has " + std::to_string(cols) + " entries, head expects " +
                      std::to_string(weights[0].cols()));
    }
  }

  static Scalar& locate(ProjectionHeadT& h, std::size_t i) {
    for (int l = 0; l < kLayers; ++l) {
      auto nw = static_cast<std::size_t>(h.weights[l].size());
      if (i < nw) return h.weights[l].data()[i];
      i -= nw;
      auto nb = static_cast<std::size_t>(h.biases[l].size());
      if (i < nb) return h.biases[l].data()[i];
      i -= nb;
    }
    throw Error(ErrorCode::ConfigInvalid, "encoder", "parameter index out of range");
  }
};

using ProjectionHead = ProjectionHeadT<double>;

}  // namespace xsema
