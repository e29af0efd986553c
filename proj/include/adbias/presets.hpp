#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adbias/config.hpp"

namespace adbias {

inline constexpr std::uint64_t kDefaultBaseSeed = 20220617;
inline constexpr int kDeskReplications = 200;
inline constexpr int kFullReplications = 1000;

struct PresetOptions {
    std::optional<int> replications;
    std::optional<std::uint64_t> seed;
    bool full = false;  // 1,000 replications unless `replications` is set
};

const std::vector<std::string>& preset_names();
bool is_preset(const std::string& name);

/// Fully populated configuration for a figure id. Throws Error(config) for unknown names.
ExperimentConfig preset(const std::string& name, const PresetOptions& options = {});

/// Modeler prior for a degree-k polynomial class: N(0, diag(100, 10, 0.1, 0.001)) truncated to k + 1.
PriorSpec polynomial_prior(int degree);

} // namespace adbias
