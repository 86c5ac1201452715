#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "plc/instance.hpp"

namespace plc {

enum class PrivacyMode { Off, Structural, Exhaustive };

/// Parsed experiment configuration. Line-oriented `key = value` format,
/// `#` starts a comment, matrices use space-separated entries with `;`
/// between rows, e.g. `G = 1 0 1 1 ; 0 1 1 1`.
struct RunConfig {
    std::uint32_t q = 5;
    std::vector<std::vector<long long>> g_rows;
    std::vector<std::vector<long long>> v_rows;
    std::size_t v = 1; // requested function, 1-based as written
    std::optional<std::vector<std::vector<std::uint8_t>>> lambda_rows;
    std::uint64_t seed = 1;
    std::size_t trials = 20;
    bool trials_set = false;
    PrivacyMode privacy = PrivacyMode::Off;
    bool emit_queries = false;
    bool fixed_randomness = false;
    std::uint64_t privacy_budget = 1ULL << 24;
    std::optional<std::string> message_file;

    Instance instance() const;
};

RunConfig parse_config(std::istream& in, const std::string& name);
RunConfig parse_config_file(const std::string& path);

} // namespace plc
