#include "mtmlca/serialization.hpp"

#include <string>

#include "mtmlca/errors.hpp"

namespace mtmlca {

using nlohmann::json;

json mvnn_to_json(const MvnnParams& params) {
  json doc;
  doc["format"] = kMvnnFormat;
  doc["version"] = kMvnnFormatVersion;
  doc["cutoff"] = params.cutoff;
  doc["scale"] = params.scale;
  json layers = json::array();
  for (std::size_t s = 0; s < params.weights.size(); ++s) {
    const auto& w = params.weights[s];
    json layer;
    layer["rows"] = w.rows();
    layer["cols"] = w.cols();
    json values = json::array();
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) values.push_back(w(r, c));
    }
    layer["weights"] = std::move(values);
    if (s < params.biases.size()) {
      layer["bias"] = std::vector<double>(params.biases[s].data(), params.biases[s].data() + params.biases[s].size());
    }
    layers.push_back(std::move(layer));
  }
  doc["layers"] = std::move(layers);
  if (params.embedding) {
    const auto& e = params.embedding->values;
    doc["embedding"] = {{"depth", params.embedding->depth},
                        {"values", std::vector<double>(e.data(), e.data() + e.size())}};
  }
  return doc;
}

MvnnParams mvnn_from_json(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != kMvnnFormat) throw ArgumentError("not an mvnn document");
    if (doc.at("version").get<int>() != kMvnnFormatVersion) {
      throw ArgumentError("unsupported mvnn document version " + doc.at("version").dump());
    }
    MvnnParams p;
    p.cutoff = doc.at("cutoff").get<double>();
    p.scale = doc.at("scale").get<double>();
    const auto& layers = doc.at("layers");
    for (std::size_t s = 0; s < layers.size(); ++s) {
      const auto& layer = layers[s];
      const auto rows = layer.at("rows").get<Eigen::Index>();
      const auto cols = layer.at("cols").get<Eigen::Index>();
      const auto values = layer.at("weights").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(values.size()) != rows * cols) throw ArgumentError("weight array has wrong length");
      Eigen::MatrixXd w(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = values[static_cast<std::size_t>(r * cols + c)];
      }
      p.weights.push_back(std::move(w));
      if (s + 1 < layers.size()) {
        const auto bias = layer.at("bias").get<std::vector<double>>();
        p.biases.push_back(Eigen::Map<const Eigen::VectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size())));
      } else if (layer.contains("bias")) {
        throw ArgumentError("output layer must not carry a bias");
      }
    }
    if (doc.contains("embedding")) {
      const auto& e = doc.at("embedding");
      const auto values = e.at("values").get<std::vector<double>>();
      IdEmbedding emb;
      emb.depth = e.at("depth").get<int>();
      emb.values = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
      p.embedding = std::move(emb);
    }
    if (p.weights.size() < 2 || !satisfies_constraints(p)) {
      throw ArgumentError("mvnn document violates the network constraints");
    }
    return p;
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("malformed mvnn document: ") + e.what());
  }
}

}  // namespace mtmlca
