#include "swvi/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace swvi {

std::vector<std::string> column_names(const std::string& prefix, Index n) {
  std::vector<std::string> names;
  for (Index i = 1; i <= n; ++i) names.push_back(prefix + std::to_string(i));
  return names;
}

void write_csv(const std::filesystem::path& path, const Matrix& data,
               const std::vector<std::string>& header) {
  require_dims(static_cast<Index>(header.size()) == data.cols(), "CSV header does not match columns");
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  for (std::size_t c = 0; c < header.size(); ++c) f << (c ? "," : "") << header[c];
  f << '\n';
  char buf[32];
  for (Index r = 0; r < data.rows(); ++r) {
    for (Index c = 0; c < data.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", data(r, c));
      f << (c ? "," : "") << buf;
    }
    f << '\n';
  }
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(f, line)) throw ValidationError(path.string() + ": empty CSV");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": not a number '" +
                              cell + "'");
      }
    }
    if (row.size() != t.header.size())
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(t.header.size()) + " columns");
    rows.push_back(std::move(row));
  }
  t.data.resize(static_cast<Index>(rows.size()), static_cast<Index>(t.header.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) t.data(r, c) = rows[r][c];
  return t;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix json_to_matrix(const nlohmann::json& j) {
  if (!j.is_array()) throw ValidationError("expected a matrix (array of rows)");
  const Index rows = static_cast<Index>(j.size());
  const Index cols = rows == 0 ? 0 : static_cast<Index>(j.at(0).size());
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto& row = j.at(r);
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw ValidationError("matrix rows must be arrays of equal length");
    for (Index c = 0; c < cols; ++c) m(r, c) = row.at(c).get<double>();
  }
  return m;
}

nlohmann::json vector_to_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Vector json_to_vector(const nlohmann::json& j) {
  if (!j.is_array()) throw ValidationError("expected an array of numbers");
  const auto vals = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(vals.data(), static_cast<Index>(vals.size()));
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read " + path.string());
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace swvi
