#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "gmia/graph.hpp"

namespace gmia::io {

/// Writes to a sibling temporary file and renames it over `path`.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

/// {"rows": r, "cols": c, "data": [column-major values]}
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

/// %.17g formatting, round-trips every finite double.
std::string format_double(double v);

}  // namespace gmia::io
