#include "hbi/io.hpp"

#include "hbi/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace hbi::io {

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, const std::string& context) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw IoError(context + ": cannot parse number '" + std::string(text) + "'");
  return value;
}

Vector Table::column(std::string_view name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) return values.col(static_cast<Eigen::Index>(c));
  }
  throw IoError("table has no column '" + std::string(name) + "'");
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw IoError(path.string() + ": write failed");
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

void write_table(const fs::path& path, const std::vector<std::string>& header, const Matrix& values) {
  if (static_cast<Eigen::Index>(header.size()) != values.cols())
    throw DimensionError(path.string() + ": header has " + std::to_string(header.size()) +
                         " names for " + std::to_string(values.cols()) + " columns");
  std::string text;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) text += ',';
    text += header[c];
  }
  text += '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (j) text += ',';
      const auto res =
          std::to_chars(buf, buf + sizeof buf, values(i, j), std::chars_format::general, 17);
      text.append(buf, res.ptr);
    }
    text += '\n';
  }
  write_text(path, text);
}

Table read_table(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty file, expected a header line");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  Table t;
  for (auto f : split(line)) t.header.emplace_back(f);
  const std::size_t cols = t.header.size();

  std::vector<double> data;
  long row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const auto fields = split(line);
    if (fields.size() != cols)
      throw IoError(path.string() + ": row " + std::to_string(row) + " has " +
                    std::to_string(fields.size()) + " fields, header has " + std::to_string(cols));
    for (std::size_t c = 0; c < cols; ++c) {
      data.push_back(parse_double(fields[c], path.string() + " row " + std::to_string(row) +
                                                 " column " + t.header[c]));
    }
  }
  if (in.bad()) throw IoError(path.string() + ": read failed");
  t.values = Eigen::Map<Matrix>(data.data(), row, static_cast<Eigen::Index>(cols));
  return t;
}

Matrix columns_to_matrix(const std::vector<const Vector*>& columns) {
  if (columns.empty()) return Matrix(0, 0);
  const Eigen::Index rows = columns.front()->size();
  Matrix out(rows, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c]->size() != rows) throw DimensionError("columns_to_matrix: column lengths differ");
    out.col(static_cast<Eigen::Index>(c)) = *columns[c];
  }
  return out;
}

std::vector<std::string> indexed_names(std::string_view prefix, std::size_t n) {
  std::vector<std::string> names;
  names.reserve(n);
  for (std::size_t j = 1; j <= n; ++j) names.push_back(std::string(prefix) + "_" + std::to_string(j));
  return names;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": malformed JSON (" + e.what() + ")");
  }
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

void write_text(const fs::path& path, std::string_view text) {
  auto out = open_out(path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  close_out(out, path);
}

void ensure_directory(const fs::path& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) throw IoError(path.string() + ": cannot create directory (" + ec.message() + ")");
  if (!fs::is_directory(path)) throw IoError(path.string() + ": not a directory");
}

}  // namespace hbi::io
