#include "mtmlca/mvnn.hpp"

#include <string>

#include "mtmlca/errors.hpp"

namespace mtmlca {

Eigen::VectorXd MvnnParams::layer_bias(int layer) const {
  const auto& b = biases[static_cast<std::size_t>(layer)];
  if (!embedding || embedding->depth != layer + 1) return b;
  Eigen::VectorXd full(b.size() + embedding->values.size());
  full << b, embedding->values;
  return full;
}

MvnnParams new_mvnn(const Architecture& arch, int input_dim, Rng& rng) {
  if (arch.hidden_widths.empty()) throw ConfigError("architecture needs at least one hidden layer");
  if (input_dim < 1) throw ConfigError("input dimension must be positive");
  if (!(arch.cutoff > 0.0)) throw ConfigError("bounded-ReLU cutoff t must be positive");
  for (int w : arch.hidden_widths) {
    if (w < 1) throw ConfigError("hidden widths must be >= 1");
  }

  MvnnParams p;
  p.cutoff = arch.cutoff;
  int width_in = input_dim;
  std::vector<int> widths = arch.hidden_widths;
  widths.push_back(1);
  for (std::size_t s = 0; s < widths.size(); ++s) {
    const int width_out = widths[s];
    Eigen::MatrixXd w(width_out, width_in);
    const double hi = 1.0 / width_in;
    for (int r = 0; r < width_out; ++r) {
      for (int c = 0; c < width_in; ++c) w(r, c) = rng.uniform(0.0, hi);
    }
    p.weights.push_back(std::move(w));
    if (s + 1 < widths.size()) {
      Eigen::VectorXd b(width_out);
      for (int r = 0; r < width_out; ++r) b(r) = -rng.uniform(0.0, 0.1);
      p.biases.push_back(std::move(b));
    }
    width_in = width_out;
  }
  return p;
}

Eigen::VectorXd to_dense(const Bundle& bundle) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(bundle.size()));
  for (std::size_t k = 0; k < bundle.size(); ++k) {
    if (bundle.test(k)) x(static_cast<Eigen::Index>(k)) = 1.0;
  }
  return x;
}

double forward_raw(const MvnnParams& params, const Eigen::VectorXd& x) {
  if (x.size() != params.input_dim()) {
    throw ArgumentError("input has " + std::to_string(x.size()) + " entries, network expects " +
                        std::to_string(params.input_dim()));
  }
  Eigen::VectorXd h = x;
  const int hidden = params.num_layers() - 1;
  for (int s = 0; s < hidden; ++s) {
    Eigen::VectorXd z = params.weights[static_cast<std::size_t>(s)] * h + params.layer_bias(s);
    h = z.unaryExpr([t = params.cutoff](double v) { return bounded_relu(v, t); });
  }
  return (params.weights.back() * h)(0);
}

Eigen::RowVectorXd forward_raw_batch(const MvnnParams& params, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != params.input_dim()) throw ArgumentError("batch input dimension mismatch");
  Eigen::MatrixXd h = inputs;
  const int hidden = params.num_layers() - 1;
  for (int s = 0; s < hidden; ++s) {
    Eigen::MatrixXd z = params.weights[static_cast<std::size_t>(s)] * h;
    z.colwise() += params.layer_bias(s);
    h = z.unaryExpr([t = params.cutoff](double v) { return bounded_relu(v, t); });
  }
  return params.weights.back() * h;
}

double forward(const MvnnParams& params, const Bundle& bundle) {
  return params.scale * forward_raw(params, to_dense(bundle));
}

MvnnParams inject_id(const MvnnParams& params, const IdEmbedding& embedding, Rng& rng,
                     AppendedRowInit row_init) {
  const int hidden = params.num_layers() - 1;
  if (params.embedding) throw ConfigError("network already carries an injected embedding");
  if (embedding.depth < 1 || embedding.depth > hidden) {
    throw ConfigError("injection depth " + std::to_string(embedding.depth) + " outside hidden layers 1.." +
                      std::to_string(hidden));
  }
  if (embedding.dim() < 1) throw ConfigError("embedding dimension must be >= 1");
  if ((embedding.values.array() > 0.0).any()) throw ArgumentError("embedding entries must be <= 0");

  MvnnParams out = params;
  const auto j = static_cast<std::size_t>(embedding.depth - 1);
  const int d = embedding.dim();

  Eigen::MatrixXd& w_in = out.weights[j];
  const auto old_rows = w_in.rows();
  Eigen::MatrixXd grown_in(old_rows + d, w_in.cols());
  grown_in.topRows(old_rows) = w_in;
  grown_in.bottomRows(d).setZero();
  if (row_init == AppendedRowInit::kFresh) {
    const double hi = 1.0 / static_cast<double>(w_in.cols());
    for (int r = 0; r < d; ++r) {
      for (Eigen::Index c = 0; c < w_in.cols(); ++c) grown_in(old_rows + r, c) = rng.uniform(0.0, hi);
    }
  }
  w_in = std::move(grown_in);

  Eigen::MatrixXd& w_next = out.weights[j + 1];
  const auto old_cols = w_next.cols();
  Eigen::MatrixXd grown_next(w_next.rows(), old_cols + d);
  grown_next.leftCols(old_cols) = w_next;
  const double hi = 1.0 / static_cast<double>(old_cols + d);
  for (Eigen::Index r = 0; r < w_next.rows(); ++r) {
    for (int c = 0; c < d; ++c) grown_next(r, old_cols + c) = rng.uniform(0.0, hi);
  }
  w_next = std::move(grown_next);

  out.embedding = embedding;
  return out;
}

bool satisfies_constraints(const MvnnParams& params) {
  const int k = params.num_layers();
  if (k < 2 || static_cast<int>(params.biases.size()) != k - 1) return false;
  if (!(params.cutoff > 0.0) || !(params.scale > 0.0)) return false;
  for (int s = 0; s < k; ++s) {
    const auto& w = params.weights[static_cast<std::size_t>(s)];
    if ((w.array() < 0.0).any() || !w.allFinite()) return false;
    if (s > 0 && w.cols() != params.weights[static_cast<std::size_t>(s - 1)].rows()) return false;
  }
  if (params.weights.back().rows() != 1) return false;
  for (int s = 0; s < k - 1; ++s) {
    const auto& b = params.biases[static_cast<std::size_t>(s)];
    if ((b.array() > 0.0).any() || !b.allFinite()) return false;
    const auto extra = (params.embedding && params.embedding->depth == s + 1) ? params.embedding->dim() : 0;
    if (b.size() + extra != params.weights[static_cast<std::size_t>(s)].rows()) return false;
  }
  if (params.embedding) {
    const auto& e = *params.embedding;
    if (e.depth < 1 || e.depth > k - 1) return false;
    if ((e.values.array() > 0.0).any() || !e.values.allFinite()) return false;
  }
  return true;
}

double output_upper_bound(const MvnnParams& params) {
  return params.scale * params.weights.back().sum() * params.cutoff;
}

}  // namespace mtmlca
