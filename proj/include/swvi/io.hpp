#pragma once

#include "swvi/types.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace swvi {

/// {prefix}1 .. {prefix}n
std::vector<std::string> column_names(const std::string& prefix, Index n);

/// Comma-separated, one header line, values printed with %.17g so that a
/// read back is exact.
void write_csv(const std::filesystem::path& path, const Matrix& data,
               const std::vector<std::string>& header);

struct CsvTable {
  std::vector<std::string> header;
  Matrix data;
};

/// Reads a numeric CSV with one header line.
CsvTable read_csv(const std::filesystem::path& path);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix json_to_matrix(const nlohmann::json& j);
nlohmann::json vector_to_json(const Vector& v);
Vector json_to_vector(const nlohmann::json& j);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace swvi
