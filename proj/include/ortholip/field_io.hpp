#pragma once

// Field import/export: <base>.json holds the grid header, <base>.csv one row per
// node (index tuple, value). Doubles use the shortest round-trip decimal form,
// so write followed by read reproduces every bit.

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "ortholip/grid.hpp"

namespace ortholip {

std::string format_double(double v);
double parse_double(std::string_view text);

nlohmann::json grid_to_json(const Grid& grid);
Grid grid_from_json(const nlohmann::json& j);

void write_field(const ScalarField& field, const std::filesystem::path& base);
ScalarField read_field(const std::filesystem::path& base);

/// Writes to <path>.partial, then renames over <path>.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace ortholip
