#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "svsp/core/error.hpp"
#include "svsp/core/matrix.hpp"

namespace svsp::detail {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string read_text(const std::filesystem::path& path, const char* what);
void write_text(const std::filesystem::path& path, const std::string& text, const char* what);

const json& field(const json& obj, const char* key);
Vector to_vector(const json& j, const std::string& what);
Matrix to_matrix(const json& j, const std::string& what);
ordered_json from_matrix(const Matrix& m);
double to_double(const json& j, const std::string& what);
std::uint64_t to_count(const json& j, const std::string& what);

}  // namespace svsp::detail
