#pragma once
// Plain-text artifact files: CSV tables of doubles written at 17 significant
// digits, and JSON documents.  All failures surface as IoError with the path.

#include "hbi/forward.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hbi::io {

namespace fs = std::filesystem;

std::string format_double(double x);

// Whole-string parse; `context` is prepended to the error message.
double parse_double(std::string_view text, const std::string& context);

struct Table {
  std::vector<std::string> header;
  Matrix values;

  // Column by header name; IoError if absent.
  Vector column(std::string_view name) const;
};

void write_table(const fs::path& path, const std::vector<std::string>& header, const Matrix& values);
Table read_table(const fs::path& path);

// Columns given as equally sized vectors.
Matrix columns_to_matrix(const std::vector<const Vector*>& columns);

// prefix_1 .. prefix_n
std::vector<std::string> indexed_names(std::string_view prefix, std::size_t n);

nlohmann::json read_json(const fs::path& path);
void write_json(const fs::path& path, const nlohmann::json& doc);

void write_text(const fs::path& path, std::string_view text);
void ensure_directory(const fs::path& path);

}  // namespace hbi::io
