#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "m2spec/mc.hpp"

namespace m2spec {

/// Builds an ExperimentConfig from its JSON form. Unknown keys and invalid
/// values raise ConfigError naming the key.
///
/// Complex scalars are written as a number or a [re, im] pair. Rational
/// sections are {"zero", "pole", "gain"} or {"num": [b0, b1], "pole"}.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);

RationalSection1D parse_section(const nlohmann::json& j, const std::string& key);
MAKernel parse_kernel(const nlohmann::json& j, const std::string& key);
RadarModel parse_radar(const nlohmann::json& j, const std::string& key);
GraphicalModel parse_graphical_model(const nlohmann::json& j, const std::string& key);

/// 64-bit FNV-1a of a byte string.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace m2spec
