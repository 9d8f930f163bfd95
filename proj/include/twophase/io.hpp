#pragma once

// Artifact output: shortest round-trip number formatting, CSV tables, atomic file writes,
// SHA-256 checksums and the run manifest.

#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

#include <json.hpp>

#include "twophase/error.hpp"

namespace twophase {

inline constexpr std::string_view kLibraryVersion = "0.1.0";
inline constexpr int kManifestSchemaVersion = 1;

/// Shortest decimal representation that parses back to the same double ('.' decimal point).
inline std::string format_double(double x) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (res.ec != std::errc()) throw Error(ErrorCode::InvalidArgument, "number formatting failed");
  return std::string(buf.data(), res.ptr);
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::InvalidArgument, "sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  class Row {
   public:
    Row& operator<<(double x) { return push(format_double(x)); }
    Row& operator<<(int x) { return push(std::to_string(x)); }
    Row& operator<<(long x) { return push(std::to_string(x)); }
    Row& operator<<(bool x) { return push(x ? "true" : "false"); }
    Row& operator<<(const std::string& s) { return push(s); }
    Row& operator<<(const char* s) { return push(s); }

   private:
    friend class CsvTable;
    Row& push(std::string s) {
      cells_.push_back(std::move(s));
      return *this;
    }
    std::vector<std::string> cells_;
  };

  Row& row() {
    rows_.emplace_back();
    return rows_.back();
  }

  std::string str() const {
    std::string out = join(header_);
    for (const Row& r : rows_) {
      if (r.cells_.size() != header_.size()) throw Error(ErrorCode::InvalidArgument, "csv row width mismatch");
      out += join(r.cells_);
    }
    return out;
  }

  std::size_t size() const { return rows_.size(); }

 private:
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q.push_back('"');
      q.push_back(c);
    }
    return q + "\"";
  }
  static std::string join(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) line.push_back(',');
      line += quote(cells[i]);
    }
    return line + "\n";
  }

  std::vector<std::string> header_;
  std::vector<Row> rows_;
};

struct ArtifactRecord {
  std::string name;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

/// Writes files into one directory via temp file + rename and records their checksums.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& directory() const { return dir_; }

  void write(const std::string& name, const std::string& content) {
    const std::lock_guard<std::mutex> lock(mutex_);
    std::filesystem::create_directories(dir_);
    atomic_write(dir_ / name, content);
    for (auto& r : records_)
      if (r.name == name) {
        r = {name, sha256_hex(content), content.size()};
        return;
      }
    records_.push_back({name, sha256_hex(content), content.size()});
  }

  void write_json(const std::string& name, const nlohmann::ordered_json& j) { write(name, j.dump(2) + "\n"); }

  /// Written last; lists every file written so far.
  void write_manifest(const std::string& command, const nlohmann::ordered_json& config) {
    nlohmann::ordered_json m;
    m["schema_version"] = kManifestSchemaVersion;
    m["library_version"] = std::string(kLibraryVersion);
    m["command"] = command;
    m["config_sha256"] = sha256_hex(config.dump());
    m["config"] = config;
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const auto& r : records_) files.push_back({{"name", r.name}, {"sha256", r.sha256}, {"bytes", r.bytes}});
    m["files"] = files;
    const std::lock_guard<std::mutex> lock(mutex_);
    std::filesystem::create_directories(dir_);
    atomic_write(dir_ / "manifest.json", m.dump(2) + "\n");
  }

  const std::vector<ArtifactRecord>& records() const { return records_; }

  /// Lists the files of a writer in subdirectory `prefix` (its manifest included) in this manifest.
  void adopt(const ArtifactWriter& sub, const std::string& prefix) {
    const std::lock_guard<std::mutex> lock(mutex_);
    for (const auto& r : sub.records()) records_.push_back({prefix + "/" + r.name, r.sha256, r.bytes});
    const std::string m = read_file(sub.directory() / "manifest.json");
    records_.push_back({prefix + "/manifest.json", sha256_hex(m), m.size()});
  }

 private:
  static void atomic_write(const std::filesystem::path& target, const std::string& content) {
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorCode::InvalidArgument, "cannot open " + tmp.string());
      out.write(content.data(), static_cast<std::streamsize>(content.size()));
      if (!out) throw Error(ErrorCode::InvalidArgument, "write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
  }

  std::filesystem::path dir_;
  std::vector<ArtifactRecord> records_;
  std::mutex mutex_;
};

}  // namespace twophase
