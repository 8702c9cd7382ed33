#include "svsp/core/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "svsp/core/error.hpp"

namespace svsp {
namespace {

using nlohmann::json;

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

Vector read_vector(const json& doc, const char* key, const std::filesystem::path& path) {
  if (!doc.contains(key) || !doc[key].is_array())
    throw InputError(path.string() + ": missing array '" + key + "'");
  Vector v;
  for (const auto& x : doc[key]) {
    if (!x.is_number()) throw InputError(path.string() + ": non-numeric entry in '" + key + "'");
    v.push_back(x.get<double>());
  }
  return v;
}

std::vector<std::string> read_names(const json& doc, const char* key, const std::filesystem::path& path) {
  std::vector<std::string> names;
  if (!doc.contains(key) || doc[key].is_null()) return names;
  if (!doc[key].is_array()) throw InputError(path.string() + ": '" + key + "' must be an array");
  for (const auto& x : doc[key]) {
    if (!x.is_string()) throw InputError(path.string() + ": non-string entry in '" + key + "'");
    names.push_back(x.get<std::string>());
  }
  return names;
}

std::size_t read_count(const json& doc, const char* key, const std::filesystem::path& path, bool required) {
  if (!doc.contains(key)) {
    if (required) throw InputError(path.string() + ": missing '" + key + "'");
    return 0;
  }
  const auto& v = doc[key];
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw InputError(path.string() + ": '" + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

}  // namespace

void DatasetManifest::validate() const {
  if (state_dim == 0 || action_dim == 0) throw InputError("manifest: state_dim and action_dim must be positive");
  if (action_low.size() != action_dim || action_high.size() != action_dim)
    throw InputError("manifest: action bounds must have action_dim entries");
  for (std::size_t i = 0; i < action_dim; ++i) {
    if (!std::isfinite(action_low[i]) || !std::isfinite(action_high[i]) || action_low[i] > action_high[i])
      throw InputError("manifest: invalid bounds for action " + std::to_string(i));
  }
  if (!feature_names.empty() && feature_names.size() != state_dim)
    throw InputError("manifest: feature_names length does not match state_dim");
  if (!action_names.empty() && action_names.size() != action_dim)
    throw InputError("manifest: action_names length does not match action_dim");
}

TransitionDataset make_dataset(Matrix states, Matrix actions, Vector action_low, Vector action_high) {
  if (states.rows() == 0) throw InputError("dataset is empty");
  if (states.rows() != actions.rows())
    throw InputError("dataset: " + std::to_string(states.rows()) + " state rows vs " +
                     std::to_string(actions.rows()) + " action rows");
  if (states.cols() == 0 || actions.cols() == 0) throw InputError("dataset: zero-width states or actions");
  if (action_low.size() != actions.cols() || action_high.size() != actions.cols())
    throw InputError("dataset: bounds do not match action_dim");
  if (!all_finite(states.flat()) || !all_finite(actions.flat())) throw InputError("dataset: non-finite entry");
  for (std::size_t r = 0; r < actions.rows(); ++r) {
    auto row = actions.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = std::clamp(row[j], action_low[j], action_high[j]);
  }
  return TransitionDataset{std::move(states), std::move(actions), std::move(action_low), std::move(action_high)};
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw InputError(path.string() + ": manifest must be an object");
  DatasetManifest m;
  m.state_dim = read_count(doc, "state_dim", path, true);
  m.action_dim = read_count(doc, "action_dim", path, true);
  m.action_low = read_vector(doc, "action_low", path);
  m.action_high = read_vector(doc, "action_high", path);
  m.episode_count = read_count(doc, "episode_count", path, false);
  m.feature_names = read_names(doc, "feature_names", path);
  m.action_names = read_names(doc, "action_names", path);
  try {
    m.validate();
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return m;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  manifest.validate();
  nlohmann::ordered_json doc;
  doc["state_dim"] = manifest.state_dim;
  doc["action_dim"] = manifest.action_dim;
  doc["action_low"] = manifest.action_low;
  doc["action_high"] = manifest.action_high;
  doc["episode_count"] = manifest.episode_count;
  if (!manifest.feature_names.empty()) doc["feature_names"] = manifest.feature_names;
  if (!manifest.action_names.empty()) doc["action_names"] = manifest.action_names;
  std::ofstream out(path);
  if (!out) throw InputError("cannot write manifest " + path.string());
  out << doc.dump(2) << '\n';
}

TransitionDataset load_dataset(const std::filesystem::path& data_path,
                               const std::filesystem::path& manifest_path) {
  return load_dataset(data_path, load_manifest(manifest_path));
}

TransitionDataset load_dataset(const std::filesystem::path& data_path, const DatasetManifest& manifest) {
  manifest.validate();
  std::ifstream in(data_path);
  if (!in) throw InputError("cannot open dataset " + data_path.string());

  const std::size_t ds = manifest.state_dim;
  const std::size_t da = manifest.action_dim;

  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (!have_header && std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    have_header = true;
  }
  if (!have_header) throw InputError(data_path.string() + ": empty file");

  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
  const auto header = split_commas(line);
  if (header.size() != ds + da)
    throw InputError(where(data_path, line_no) + "header has " + std::to_string(header.size()) +
                     " columns, manifest expects " + std::to_string(ds) + " state + " + std::to_string(da) +
                     " action columns");
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string expected = i < ds ? "s" + std::to_string(i) : "a" + std::to_string(i - ds);
    if (trim(header[i]) != expected)
      throw InputError(where(data_path, line_no) + "expected column '" + expected + "', found '" +
                       std::string(trim(header[i])) + "'");
  }

  Matrix states(0, ds);
  Matrix actions(0, da);
  Vector s(ds), a(da);
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != ds + da)
      throw InputError(where(data_path, line_no) + "expected " + std::to_string(ds + da) + " cells, found " +
                       std::to_string(cells.size()));
    for (std::size_t i = 0; i < cells.size(); ++i) {
      double v = 0.0;
      if (!parse_double(cells[i], v))
        throw InputError(where(data_path, line_no) + "non-numeric cell '" + std::string(trim(cells[i])) + "'");
      if (!std::isfinite(v)) throw InputError(where(data_path, line_no) + "non-finite cell in column " + std::to_string(i));
      (i < ds ? s[i] : a[i - ds]) = v;
    }
    states.append_row(s);
    actions.append_row(a);
  }
  if (states.rows() == 0) throw InputError(data_path.string() + ": no data rows");
  return make_dataset(std::move(states), std::move(actions), manifest.action_low, manifest.action_high);
}

std::string format_double(double value) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", value);
  return std::string(buf, static_cast<std::size_t>(n));
}

void save_dataset(const TransitionDataset& dataset, const std::filesystem::path& data_path) {
  std::ofstream out(data_path);
  if (!out) throw InputError("cannot write dataset " + data_path.string());
  const std::size_t ds = dataset.state_dim();
  const std::size_t da = dataset.action_dim();
  std::string buf;
  for (std::size_t i = 0; i < ds; ++i) buf += (i ? ",s" : "s") + std::to_string(i);
  for (std::size_t i = 0; i < da; ++i) buf += ",a" + std::to_string(i);
  out << buf << '\n';
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    buf.clear();
    for (std::size_t i = 0; i < ds; ++i) {
      if (i) buf += ',';
      buf += format_double(dataset.states(r, i));
    }
    for (std::size_t i = 0; i < da; ++i) {
      buf += ',';
      buf += format_double(dataset.actions(r, i));
    }
    out << buf << '\n';
  }
}

DatasetManifest manifest_for(const TransitionDataset& dataset, std::size_t episode_count) {
  DatasetManifest m;
  m.state_dim = dataset.state_dim();
  m.action_dim = dataset.action_dim();
  m.action_low = dataset.action_low;
  m.action_high = dataset.action_high;
  m.episode_count = episode_count;
  return m;
}

}  // namespace svsp
