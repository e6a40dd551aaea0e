#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "eshare/market.hpp"

namespace eshare {

inline constexpr const char* kScenarioVersion = "eshare-scenario/1";

/// Bus and line indices in the file are 1-based. A missing or null line
/// limit means unlimited; the slack defaults to the last bus.
/// Throws Error{InvalidScenario} plus the network validation errors.
Scenario parse_scenario(const nlohmann::json& doc);

nlohmann::json scenario_to_json(const Scenario& scenario);

struct LoadedScenario {
  Scenario scenario;
  std::string path;
  std::string digest;  // SHA-256 of the file bytes, hex
};

/// Throws Error{FileError} when unreadable and Error{InvalidScenario} on
/// malformed JSON.
LoadedScenario load_scenario(const std::filesystem::path& path);

std::string sha256_hex(const std::string& bytes);

}  // namespace eshare
