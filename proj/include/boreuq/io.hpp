#pragma once

// Serialisation helpers shared by the study driver and the CLI.

#include "boreuq/sparse_grid.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>

namespace boreuq::io {

using json = nlohmann::ordered_json;

/// Shortest decimal that parses back to the same double.
std::string fmt_double(double v);

/// Serialised form:
///   {"format": "boreuq-interpolant", "version": 1, "dimension": D,
///    "parameter_names": [...], "domain": [[lo, hi], ...],
///    "indices": [{"levels": [...], "codes": [[...], ...], "surpluses": [...]}],
///    "metadata": {...}}
json interpolant_to_json(const sg::SparseInterpolant& itp, const json& metadata = json::object());
sg::SparseInterpolant interpolant_from_json(const json& j);

void save_interpolant(const std::filesystem::path& path, const sg::SparseInterpolant& itp,
                      const json& metadata = json::object());
/// Loads an interpolant; `metadata` (when non-null) receives the metadata block.
sg::SparseInterpolant load_interpolant(const std::filesystem::path& path, json* metadata = nullptr);

void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace boreuq::io
