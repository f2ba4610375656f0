#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtmlca/bundle.hpp"
#include "mtmlca/mvnn.hpp"

namespace mtmlca {

struct Sample {
  Bundle bundle;
  double value = 0.0;
};

enum class SharingMode {
  kNone,      // S = {}
  kFront,     // S = {1, ..., floor(K/2)}
  kRear,      // S = {floor(K/2), ..., K}
  kExplicit,  // S = TrainConfig::explicit_layers
};

std::string to_string(SharingMode mode);
SharingMode sharing_mode_from_string(const std::string& name);

struct TrainConfig {
  Architecture arch;
  double lambda = 1e-10;
  SharingMode sharing = SharingMode::kNone;
  std::vector<int> explicit_layers;  // 1-based weight-layer indices
  double learning_rate = 0.01;
  int epochs = 512;
  bool inject_id = false;
  int embed_dim = 4;
  int inject_depth = 1;

  void validate() const;
};

/// Shared weight-layer indices (1-based, ascending) for a network with
/// `num_weight_layers` matrices.
std::vector<int> shared_layers(const TrainConfig& config, int num_weight_layers);

/// Models trained jointly. All models share one architecture and one target
/// scale; reports[k] belong to bidders[k].
struct FitGroup {
  std::vector<int> bidders;
  std::vector<MvnnParams> models;
  std::vector<std::vector<Sample>> reports;
  double scale = 1.0;
};

/// Max reported value across the group, or 1 when that max is 0.
double group_scale(const std::vector<std::vector<Sample>>& reports);

/// Builds a group with fresh models. Bidder b's model (and embedding, when
/// injection is on) is drawn from Rng::substream(stream_root, {b}), so a
/// bidder's initial parameters do not depend on who else is in the group.
FitGroup make_fit_group(std::vector<int> bidders, std::vector<std::vector<Sample>> reports, int input_dim,
                        const TrainConfig& config, std::uint64_t stream_root,
                        std::optional<double> scale_override = std::nullopt);

/// Sum over ordered pairs (i, j) and shared layers s of ||W^{i,s} - W^{j,s}||_F^2.
/// `layers` are 1-based. Not multiplied by lambda.
double sharing_penalty(std::span<const MvnnParams> models, const std::vector<int>& layers);

/// Sum of squared errors against targets y/scale (network output without the
/// scale factor) plus lambda * sharing_penalty.
double total_loss(const FitGroup& group, const TrainConfig& config);

struct ParamGradient {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  Eigen::VectorXd embedding;
};

struct LossGradient {
  double loss = 0.0;
  std::vector<ParamGradient> models;
};

LossGradient loss_and_gradient(const FitGroup& group, const TrainConfig& config);

struct FitDiagnostics {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  int epochs = 0;
};

/// Full-batch projected gradient descent on total_loss over every model in
/// the group simultaneously. After each step weights are clipped to >= 0 and
/// biases/embeddings to <= 0. Throws TrainingError on a non-finite loss.
FitDiagnostics mt_fit(FitGroup& group, const TrainConfig& config);

struct ParamCoordinate {
  enum class Kind { kWeight, kBias, kEmbedding };
  int model = 0;
  Kind kind = Kind::kWeight;
  int layer = 0;  // 0-based weight or bias layer; ignored for embeddings
  int row = 0;
  int col = 0;
};

/// Mutable reference to one scalar parameter.
double& parameter_at(MvnnParams& params, const ParamCoordinate& coord);
double gradient_at(const LossGradient& grad, const ParamCoordinate& coord);

/// (loss(theta + h e) - loss(theta - h e)) / 2h, without projection.
double finite_difference_gradient(const FitGroup& group, const TrainConfig& config,
                                  const ParamCoordinate& coord, double h);

}  // namespace mtmlca
