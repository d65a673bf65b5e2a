#pragma once

// Study configuration files (JSON, schema_version 1). See README for the
// full schema; unknown keys are rejected so typos do not pass silently.

#include "boreuq/scenario.hpp"

#include <filesystem>
#include <string>

namespace boreuq::config {

/// Throws ConfigError naming the line (syntax) or field path (content).
scenario::StudyConfig parse_study(const std::string& text);
scenario::StudyConfig load_study(const std::filesystem::path& path);

/// Parses "uniform:a:b" or "triangular:a:b"; a bare kind is rejected.
dist::RandomVariableSpec parse_rv(const std::string& s);

}  // namespace boreuq::config
