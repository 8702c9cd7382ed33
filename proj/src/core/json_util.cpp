#include "core/json_util.hpp"

#include <fstream>
#include <sstream>

namespace svsp::detail {

std::string read_text(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(std::string("cannot open ") + what + " " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text, const char* what) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(std::string("cannot write ") + what + " " + path.string());
  out << text;
  if (!out) throw InputError(std::string("failed writing ") + what + " " + path.string());
}

const json& field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) throw InputError(std::string("missing field '") + key + "'");
  return obj[key];
}

Vector to_vector(const json& j, const std::string& what) {
  if (!j.is_array()) throw InputError(what + " must be an array");
  Vector v;
  v.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) throw InputError(what + " contains a non-numeric entry");
    v.push_back(x.get<double>());
  }
  return v;
}

Matrix to_matrix(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw InputError(what + " must be a non-empty array of rows");
  Matrix m;
  for (const auto& row : j) {
    const Vector r = to_vector(row, what + " row");
    if (m.rows() > 0 && r.size() != m.cols()) throw InputError(what + " is ragged");
    if (r.empty()) throw InputError(what + " has an empty row");
    m.append_row(r);
  }
  return m;
}

ordered_json from_matrix(const Matrix& m) {
  auto rows = ordered_json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(Vector(row.begin(), row.end()));
  }
  return rows;
}

double to_double(const json& j, const std::string& what) {
  if (!j.is_number()) throw InputError(what + " must be a number");
  return j.get<double>();
}

std::uint64_t to_count(const json& j, const std::string& what) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    throw InputError(what + " must be a non-negative integer");
  return j.get<std::uint64_t>();
}

}  // namespace svsp::detail
