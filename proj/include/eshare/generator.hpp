#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "eshare/market.hpp"

namespace eshare {

enum class TreeStyle { Radial, Path, Star };

TreeStyle parse_tree_style(const std::string& name);

struct GeneratorOptions {
  TreeStyle style = TreeStyle::Radial;
  // Defaults to max_i 1/c_i.
  std::optional<double> a;
  double c_min = 0.001;
  double c_max = 0.01;
  double d_min = 0.1;
  double d_max = 1.0;
  double D_min = 100.0;
  double D_max = 300.0;
  double weight_min = 0.5;
  double weight_max = 2.0;
  // Limits are this factor times the unconstrained social-optimum flow.
  double limit_factor_min = 0.6;
  double limit_factor_max = 1.4;
};

/// Deterministic radial scenario. The stream of uniforms is the top 53 bits
/// of mt19937_64, so files are identical across platforms.
Scenario generate_scenario(std::uint64_t seed, int size, const GeneratorOptions& options = {});

}  // namespace eshare
