#include "dkg/io.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "dkg/errors.hpp"

namespace dkg {

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw InvalidArgumentError("Table::add: row has " + std::to_string(row.size()) + " cells, expected " +
                               std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return quote(std::get<std::string>(c));
}

}  // namespace

std::string to_csv(const Table& t) {
  std::ostringstream os;
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << quote(t.columns[i]);
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
    os << '\n';
  }
  return os.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open " + tmp + " for writing");
    f << content;
    if (!f) throw Error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 14];
  while (f.read(buf, sizeof buf) || f.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(f.gcount()));
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

WrittenRun write_run(const RunOutput& out, const std::filesystem::path& dir, const std::string& started_utc) {
  std::filesystem::create_directories(dir);
  WrittenRun w;
  Json files = Json::array();
  auto record = [&](const std::string& name) {
    const auto p = dir / name;
    w.files.push_back(p);
    files.push_back({{"file", name}, {"sha256", sha256_file(p)}});
  };
  for (const auto& [name, table] : out.tables) {
    write_atomic(dir / name, to_csv(table));
    record(name);
  }
  Json summary;
  summary["config"] = out.config;
  summary["results"] = out.results;
  summary["warnings"] = out.warnings;
  summary["timings"] = out.timings;
  write_atomic(dir / "summary.json", summary.dump(2) + "\n");
  record("summary.json");

  Json manifest;
  manifest["tool"] = "dkg";
  manifest["tool_version"] = kToolVersion;
  if (!out.figure.empty()) manifest["figure"] = out.figure;
  manifest["config"] = out.config;
  manifest["started"] = started_utc;
  manifest["finished"] = utc_now();
  manifest["outputs"] = files;
  write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  w.files.push_back(dir / "manifest.json");
  return w;
}

}  // namespace dkg
