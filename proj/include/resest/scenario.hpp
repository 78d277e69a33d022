#pragma once

#include <cstdint>
#include <filesystem>

#include <json.hpp>

#include "resest/sim.hpp"

namespace resest {

inline constexpr int kSchemaVersion = 1;

/// Strict reader: schema_version is required, unknown keys and wrong types
/// throw ParseError. Semantic checks are left to prepare().
SimConfig scenario_from_json(const nlohmann::json& j);

/// Canonical form with every key spelled out. Scripted adversaries cannot be
/// serialized and throw ConfigInvalid.
nlohmann::json scenario_to_json(const SimConfig& cfg);

SimConfig load_scenario(const std::filesystem::path& path);
void save_scenario(const std::filesystem::path& path, const SimConfig& cfg);

/// FNV-1a over the canonical dump.
std::uint64_t config_digest(const SimConfig& cfg);

}  // namespace resest
