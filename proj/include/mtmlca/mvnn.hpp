#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mtmlca/bundle.hpp"
#include "mtmlca/rng.hpp"

namespace mtmlca {

struct Architecture {
  std::vector<int> hidden_widths{16, 16};
  double cutoff = 1.0;  // bounded-ReLU ceiling t, shared by all hidden layers
};

/// Per-bidder embedding appended as extra units of hidden layer `depth`
/// (1-based). Entries stay <= 0 so they act as extra biases.
struct IdEmbedding {
  Eigen::VectorXd values;
  int depth = 1;

  int dim() const noexcept { return static_cast<int>(values.size()); }
};

/// Monotone-value network: K weight matrices (K-1 bounded-ReLU hidden
/// layers), nonnegative weights, nonpositive biases, linear bias-free output.
///
/// weights[s] maps width_s -> width_{s+1}, with width_0 the item count and
/// the last matrix a single row. When an embedding is injected at depth j,
/// weights[j-1] carries embedding.dim() extra rows and weights[j] the matching
/// extra columns; biases[j-1] keeps its original length and the embedding
/// supplies the biases of the appended units.
struct MvnnParams {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  double cutoff = 1.0;
  double scale = 1.0;  // sigma: outputs are reported in target units
  std::optional<IdEmbedding> embedding;

  int num_layers() const noexcept { return static_cast<int>(weights.size()); }
  int input_dim() const { return static_cast<int>(weights.front().cols()); }
  /// Effective bias of hidden layer `layer` (0-based), embedding included.
  Eigen::VectorXd layer_bias(int layer) const;
};

/// Fresh network: weights ~ U[0, 1/width_in], biases ~ U[-0.1, 0].
MvnnParams new_mvnn(const Architecture& arch, int input_dim, Rng& rng);

inline double bounded_relu(double z, double t) { return z <= 0.0 ? 0.0 : (z > t ? t : z); }

/// Subgradient used in training: 1 strictly inside (0, t), 0 elsewhere.
inline double bounded_relu_slope(double z, double t) { return (z > 0.0 && z < t) ? 1.0 : 0.0; }

/// scale * network output.
double forward(const MvnnParams& params, const Bundle& bundle);

/// Unscaled output for a dense 0/1 input column.
double forward_raw(const MvnnParams& params, const Eigen::VectorXd& x);

/// Unscaled outputs for a batch (one input per column).
Eigen::RowVectorXd forward_raw_batch(const MvnnParams& params, const Eigen::MatrixXd& inputs);

Eigen::VectorXd to_dense(const Bundle& bundle);

enum class AppendedRowInit {
  kZero,   // the appended rows of layer j start at zero
  kFresh,  // drawn like fresh weights, U[0, 1/width_in]
};

/// Appends embedding.dim() units to hidden layer embedding.depth. New columns
/// of the next layer are drawn U[0, 1/width_in] from `rng`.
MvnnParams inject_id(const MvnnParams& params, const IdEmbedding& embedding, Rng& rng,
                     AppendedRowInit row_init = AppendedRowInit::kZero);

/// Weights >= 0, biases <= 0, embedding <= 0, dimensions chain, output is 1x*.
bool satisfies_constraints(const MvnnParams& params);

/// scale * sum(output weights) * t; no bundle can score higher.
double output_upper_bound(const MvnnParams& params);

}  // namespace mtmlca
