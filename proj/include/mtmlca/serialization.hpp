#pragma once

#include <nlohmann/json.hpp>

#include "mtmlca/mvnn.hpp"

namespace mtmlca {

inline constexpr const char* kMvnnFormat = "mtmlca.mvnn";
inline constexpr int kMvnnFormatVersion = 1;

/// Versioned document: layer dims, row-major weights, biases, cutoff, scale and
/// the optional embedding. Doubles are written in shortest round-trip form, so
/// mvnn_from_json(mvnn_to_json(p)) reproduces p bit for bit.
nlohmann::json mvnn_to_json(const MvnnParams& params);

/// Throws ArgumentError on a wrong format tag, unsupported version, or shape
/// inconsistency.
MvnnParams mvnn_from_json(const nlohmann::json& doc);

}  // namespace mtmlca
