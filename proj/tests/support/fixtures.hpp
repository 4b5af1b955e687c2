#pragma once

#include <string>

#include "bvvi/model_io.hpp"

#ifndef BVVI_DATA_DIR
#error "BVVI_DATA_DIR must point at the repository data/ directory"
#endif

namespace bvvi::testing {

inline std::string data_path(const std::string& name) { return std::string(BVVI_DATA_DIR) + "/" + name; }

inline TabularPomdp f1() { return load_model(data_path("f1.json")); }

// Frozen from tests/oracles/f1_golden.py (independent brute force).
inline constexpr double kF1ConstantA0Objective = 0.42805424814867876;  // gamma = -0.5
inline constexpr double kF1OptimalGammaPlusHalf = 0.91971610249919034;
inline constexpr double kF1OptimalGammaMinusHalf = 0.87429055305253878;
inline constexpr double kF1OptimalGammaPlusOne = 0.93470166400116639;
inline constexpr double kF1OptimalGammaMinusOne = 0.84143492125957053;

}  // namespace bvvi::testing
