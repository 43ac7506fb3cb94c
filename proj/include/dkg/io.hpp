#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace dkg {

using Json = nlohmann::ordered_json;

/// One CSV cell: numbers print with %.17g.
using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

std::string format_double(double x);

/// Renders header and rows; strings containing commas or quotes are quoted.
std::string to_csv(const Table& t);

/// Writes `content` to a temporary sibling and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Everything a run produces before it touches the filesystem.
struct RunOutput {
  Json config;
  Json results = Json::object();
  std::vector<std::string> warnings;
  Json timings = Json::object();
  std::vector<std::pair<std::string, Table>> tables;  // file name, table
  std::string figure;                                 // set for figure bundles
};

struct WrittenRun {
  std::vector<std::filesystem::path> files;
};

/// Writes tables, summary.json ({config, results, warnings, timings}) and
/// manifest.json (config echo, tool version, timestamps, checksums).
WrittenRun write_run(const RunOutput& out, const std::filesystem::path& dir, const std::string& started_utc);

std::string utc_now();

inline constexpr const char* kToolVersion = "1.0.0";

}  // namespace dkg
