#include "mtmlca/training.hpp"

#include <algorithm>
#include <cmath>

#include "mtmlca/errors.hpp"

namespace mtmlca {

std::string to_string(SharingMode mode) {
  switch (mode) {
    case SharingMode::kNone:
      return "none";
    case SharingMode::kFront:
      return "front";
    case SharingMode::kRear:
      return "rear";
    case SharingMode::kExplicit:
      return "explicit";
  }
  return "none";
}

SharingMode sharing_mode_from_string(const std::string& name) {
  if (name == "none") return SharingMode::kNone;
  if (name == "front") return SharingMode::kFront;
  if (name == "rear") return SharingMode::kRear;
  if (name == "explicit") return SharingMode::kExplicit;
  throw ConfigError("unknown sharing mode '" + name + "'");
}

void TrainConfig::validate() const {
  if (arch.hidden_widths.empty()) throw ConfigError("model.hidden_widths must not be empty");
  for (int w : arch.hidden_widths) {
    if (w < 1) throw ConfigError("model.hidden_widths entries must be >= 1");
  }
  if (!(arch.cutoff > 0.0)) throw ConfigError("model.cutoff must be > 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("model.lambda must be >= 0");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("model.learning_rate must be > 0");
  }
  if (epochs < 1) throw ConfigError("model.epochs must be >= 1");
  const int k = static_cast<int>(arch.hidden_widths.size()) + 1;
  if (sharing == SharingMode::kExplicit) {
    for (int s : explicit_layers) {
      if (s < 1 || s > k) throw ConfigError("model.shared_layers entries must lie in 1.." + std::to_string(k));
    }
  }
  if (inject_id) {
    if (embed_dim < 1) throw ConfigError("model.embed_dim must be >= 1");
    if (inject_depth < 1 || inject_depth > k - 1) {
      throw ConfigError("model.inject_depth must lie in 1.." + std::to_string(k - 1));
    }
  }
}

std::vector<int> shared_layers(const TrainConfig& config, int num_weight_layers) {
  const int k = num_weight_layers;
  std::vector<int> out;
  switch (config.sharing) {
    case SharingMode::kNone:
      break;
    case SharingMode::kFront:
      for (int s = 1; s <= k / 2; ++s) out.push_back(s);
      break;
    case SharingMode::kRear:
      for (int s = std::max(1, k / 2); s <= k; ++s) out.push_back(s);
      break;
    case SharingMode::kExplicit:
      out = config.explicit_layers;
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      for (int s : out) {
        if (s < 1 || s > k) throw ConfigError("shared layer index out of range");
      }
      break;
  }
  return out;
}

double group_scale(const std::vector<std::vector<Sample>>& reports) {
  double best = 0.0;
  for (const auto& list : reports) {
    for (const auto& s : list) best = std::max(best, s.value);
  }
  return best > 0.0 ? best : 1.0;
}

FitGroup make_fit_group(std::vector<int> bidders, std::vector<std::vector<Sample>> reports, int input_dim,
                        const TrainConfig& config, std::uint64_t stream_root,
                        std::optional<double> scale_override) {
  if (bidders.size() != reports.size()) throw ArgumentError("one report list per bidder is required");
  config.validate();
  FitGroup group;
  group.scale = scale_override ? *scale_override : group_scale(reports);
  if (!(group.scale > 0.0)) throw ArgumentError("target scale must be positive");
  for (int b : bidders) {
    Rng rng = Rng::substream(stream_root, {static_cast<std::uint64_t>(b)});
    MvnnParams model = new_mvnn(config.arch, input_dim, rng);
    if (config.inject_id) {
      IdEmbedding e;
      e.depth = config.inject_depth;
      e.values.resize(config.embed_dim);
      for (int c = 0; c < config.embed_dim; ++c) e.values(c) = -rng.uniform(0.0, 0.1);
      // Zero appended rows receive no gradient through a unit whose input is
      // e <= 0, so training starts them like ordinary weights.
      model = inject_id(model, e, rng, AppendedRowInit::kFresh);
    }
    model.scale = group.scale;
    group.models.push_back(std::move(model));
  }
  group.bidders = std::move(bidders);
  group.reports = std::move(reports);
  return group;
}

double sharing_penalty(std::span<const MvnnParams> models, const std::vector<int>& layers) {
  double total = 0.0;
  for (int s : layers) {
    const auto idx = static_cast<std::size_t>(s - 1);
    for (const auto& mi : models) {
      if (idx >= mi.weights.size()) throw ArgumentError("shared layer index exceeds network depth");
      for (const auto& mj : models) {
        const auto& a = mi.weights[idx];
        const auto& b = mj.weights[idx];
        if (a.rows() != b.rows() || a.cols() != b.cols()) {
          throw ArgumentError("shared layer " + std::to_string(s) + " has mismatched dimensions");
        }
        total += (a - b).squaredNorm();
      }
    }
  }
  return total;
}

namespace {

struct Batch {
  Eigen::MatrixXd inputs;    // items x samples
  Eigen::RowVectorXd targets;  // scaled
};

Batch make_batch(const std::vector<Sample>& samples, int input_dim, double scale) {
  Batch b;
  b.inputs = Eigen::MatrixXd::Zero(input_dim, static_cast<Eigen::Index>(samples.size()));
  b.targets.resize(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& x = samples[k].bundle;
    if (static_cast<int>(x.size()) != input_dim) throw ArgumentError("report bundle length mismatch");
    for (std::size_t item = 0; item < x.size(); ++item) {
      if (x.test(item)) b.inputs(static_cast<Eigen::Index>(item), static_cast<Eigen::Index>(k)) = 1.0;
    }
    b.targets(static_cast<Eigen::Index>(k)) = samples[k].value / scale;
  }
  return b;
}

void check_group(const FitGroup& group) {
  if (group.models.size() != group.reports.size()) throw ArgumentError("fit group needs one model per report list");
  for (std::size_t i = 0; i < group.reports.size(); ++i) {
    if (group.reports[i].empty()) {
      throw ArgumentError("bidder " + std::to_string(i < group.bidders.size() ? group.bidders[i] : int(i)) +
                          " has no reports to fit");
    }
  }
  if (!(group.scale > 0.0)) throw ArgumentError("target scale must be positive");
}

double regression_loss(const MvnnParams& model, const Batch& batch) {
  const Eigen::RowVectorXd residual = forward_raw_batch(model, batch.inputs) - batch.targets;
  return residual.squaredNorm();
}

// Squared-error loss and its gradient for one model.
double backprop(const MvnnParams& model, const Batch& batch, ParamGradient& grad) {
  const int k = model.num_layers();
  const int hidden = k - 1;
  const double t = model.cutoff;
  std::vector<Eigen::MatrixXd> pre(static_cast<std::size_t>(hidden));
  std::vector<Eigen::MatrixXd> act(static_cast<std::size_t>(hidden) + 1);
  act[0] = batch.inputs;
  for (int s = 0; s < hidden; ++s) {
    const auto us = static_cast<std::size_t>(s);
    pre[us] = model.weights[us] * act[us];
    pre[us].colwise() += model.layer_bias(s);
    act[us + 1] = pre[us].unaryExpr([t](double v) { return bounded_relu(v, t); });
  }
  const Eigen::RowVectorXd residual = model.weights.back() * act[static_cast<std::size_t>(hidden)] - batch.targets;
  const double loss = residual.squaredNorm();

  grad.weights.assign(static_cast<std::size_t>(k), Eigen::MatrixXd());
  grad.biases.assign(static_cast<std::size_t>(hidden), Eigen::VectorXd());
  grad.embedding = model.embedding ? Eigen::VectorXd::Zero(model.embedding->dim()) : Eigen::VectorXd();

  const Eigen::RowVectorXd d_out = 2.0 * residual;
  grad.weights.back() = d_out * act[static_cast<std::size_t>(hidden)].transpose();

  Eigen::MatrixXd delta = model.weights.back().transpose() * d_out;
  for (int s = hidden - 1; s >= 0; --s) {
    const auto us = static_cast<std::size_t>(s);
    delta.array() *= pre[us].unaryExpr([t](double v) { return bounded_relu_slope(v, t); }).array();
    grad.weights[us] = delta * act[us].transpose();
    const Eigen::VectorXd bias_grad = delta.rowwise().sum();
    const auto base = model.biases[us].size();
    grad.biases[us] = bias_grad.head(base);
    if (model.embedding && model.embedding->depth == s + 1) {
      grad.embedding = bias_grad.tail(model.embedding->dim());
    }
    if (s > 0) delta = model.weights[us].transpose() * delta;
  }
  return loss;
}

void project(MvnnParams& model) {
  for (auto& w : model.weights) w = w.cwiseMax(0.0);
  for (auto& b : model.biases) b = b.cwiseMin(0.0);
  if (model.embedding) model.embedding->values = model.embedding->values.cwiseMin(0.0);
}

std::vector<Batch> make_batches(const FitGroup& group) {
  std::vector<Batch> batches;
  batches.reserve(group.models.size());
  for (std::size_t i = 0; i < group.models.size(); ++i) {
    batches.push_back(make_batch(group.reports[i], group.models[i].input_dim(), group.scale));
  }
  return batches;
}

double loss_with_batches(const FitGroup& group, const TrainConfig& config, const std::vector<Batch>& batches,
                         const std::vector<int>& layers) {
  double loss = 0.0;
  for (std::size_t i = 0; i < group.models.size(); ++i) loss += regression_loss(group.models[i], batches[i]);
  if (!layers.empty() && config.lambda != 0.0) {
    loss += config.lambda * sharing_penalty(group.models, layers);
  }
  return loss;
}

LossGradient gradient_with_batches(const FitGroup& group, const TrainConfig& config,
                                   const std::vector<Batch>& batches, const std::vector<int>& layers) {
  LossGradient out;
  out.models.resize(group.models.size());
  for (std::size_t i = 0; i < group.models.size(); ++i) {
    out.loss += backprop(group.models[i], batches[i], out.models[i]);
  }
  if (!layers.empty() && config.lambda != 0.0) {
    out.loss += config.lambda * sharing_penalty(group.models, layers);
    // d/dW^{i,s} of sum over ordered pairs = 4 * sum_{j != i} (W^{i,s} - W^{j,s}).
    for (int s : layers) {
      const auto idx = static_cast<std::size_t>(s - 1);
      for (std::size_t i = 0; i < group.models.size(); ++i) {
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(group.models[i].weights[idx].rows(),
                                                    group.models[i].weights[idx].cols());
        for (std::size_t j = 0; j < group.models.size(); ++j) {
          if (j != i) acc += group.models[i].weights[idx] - group.models[j].weights[idx];
        }
        out.models[i].weights[idx] += (4.0 * config.lambda) * acc;
      }
    }
  }
  return out;
}

}  // namespace

double total_loss(const FitGroup& group, const TrainConfig& config) {
  check_group(group);
  const auto layers = shared_layers(config, group.models.front().num_layers());
  return loss_with_batches(group, config, make_batches(group), layers);
}

LossGradient loss_and_gradient(const FitGroup& group, const TrainConfig& config) {
  check_group(group);
  const auto layers = shared_layers(config, group.models.front().num_layers());
  return gradient_with_batches(group, config, make_batches(group), layers);
}

FitDiagnostics mt_fit(FitGroup& group, const TrainConfig& config) {
  config.validate();
  check_group(group);
  const auto layers = shared_layers(config, group.models.front().num_layers());
  const auto batches = make_batches(group);
  const double eta = config.learning_rate;

  FitDiagnostics diag;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    LossGradient g = gradient_with_batches(group, config, batches, layers);
    if (!std::isfinite(g.loss)) {
      throw TrainingError("training loss became non-finite at epoch " + std::to_string(epoch), epoch);
    }
    if (epoch == 0) diag.initial_loss = g.loss;
    for (std::size_t i = 0; i < group.models.size(); ++i) {
      auto& model = group.models[i];
      const auto& grad = g.models[i];
      for (std::size_t s = 0; s < model.weights.size(); ++s) model.weights[s] -= eta * grad.weights[s];
      for (std::size_t s = 0; s < model.biases.size(); ++s) model.biases[s] -= eta * grad.biases[s];
      if (model.embedding) model.embedding->values -= eta * grad.embedding;
      project(model);
    }
  }
  diag.epochs = config.epochs;
  diag.final_loss = loss_with_batches(group, config, batches, layers);
  if (!std::isfinite(diag.final_loss)) {
    throw TrainingError("training loss became non-finite at epoch " + std::to_string(config.epochs),
                        config.epochs);
  }
  return diag;
}

double& parameter_at(MvnnParams& params, const ParamCoordinate& c) {
  switch (c.kind) {
    case ParamCoordinate::Kind::kWeight:
      return params.weights.at(static_cast<std::size_t>(c.layer))(c.row, c.col);
    case ParamCoordinate::Kind::kBias:
      return params.biases.at(static_cast<std::size_t>(c.layer))(c.row);
    case ParamCoordinate::Kind::kEmbedding:
      if (!params.embedding) throw ArgumentError("model has no embedding");
      return params.embedding->values(c.row);
  }
  throw ArgumentError("unknown coordinate kind");
}

double gradient_at(const LossGradient& grad, const ParamCoordinate& c) {
  const auto& g = grad.models.at(static_cast<std::size_t>(c.model));
  switch (c.kind) {
    case ParamCoordinate::Kind::kWeight:
      return g.weights.at(static_cast<std::size_t>(c.layer))(c.row, c.col);
    case ParamCoordinate::Kind::kBias:
      return g.biases.at(static_cast<std::size_t>(c.layer))(c.row);
    case ParamCoordinate::Kind::kEmbedding:
      return g.embedding(c.row);
  }
  throw ArgumentError("unknown coordinate kind");
}

double finite_difference_gradient(const FitGroup& group, const TrainConfig& config, const ParamCoordinate& coord,
                                  double h) {
  FitGroup plus = group;
  FitGroup minus = group;
  parameter_at(plus.models.at(static_cast<std::size_t>(coord.model)), coord) += h;
  parameter_at(minus.models.at(static_cast<std::size_t>(coord.model)), coord) -= h;
  return (total_loss(plus, config) - total_loss(minus, config)) / (2.0 * h);
}

}  // namespace mtmlca
