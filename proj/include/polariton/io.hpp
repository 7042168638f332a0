#pragma once
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>
#include <zlib.h>

#include <json.hpp>

#include "errors.hpp"

namespace pol::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// Shortest round-trip representation, independent of locale.
inline std::string fmt_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx, md, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("sha256 failed");
  }
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// gzip with a zero timestamp so identical input gives identical bytes.
inline std::string gzip(const std::string& data) {
  z_stream zs{};
  if (deflateInit2(&zs, 6, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) throw Error("deflateInit2 failed");
  gz_header hdr{};
  hdr.os = 255;
  deflateSetHeader(&zs, &hdr);
  std::string out(deflateBound(&zs, data.size()) + 32, '\0');
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  const size_t n = zs.total_out;
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw Error("gzip failed");
  out.resize(n);
  return out;
}

inline std::string gunzip(const std::string& data) {
  z_stream zs{};
  if (inflateInit2(&zs, 15 + 16) != Z_OK) throw Error("inflateInit2 failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  std::string out;
  char buf[1 << 16];
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = reinterpret_cast<Bytef*>(buf);
    zs.avail_out = sizeof buf;
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw Error("corrupt gzip stream");
    }
    out.append(buf, sizeof buf - zs.avail_out);
  }
  inflateEnd(&zs);
  return out;
}

// Column-oriented CSV with a header row.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(const std::vector<double>& row) {
    std::vector<std::string> cells;
    for (double v : row) cells.push_back(fmt_double(v));
    add_cells(std::move(cells));
  }
  void add_cells(std::vector<std::string> row) {
    if (row.size() != header_.size()) throw Error("csv row width mismatch");
    rows_.push_back(std::move(row));
  }
  size_t size() const { return rows_.size(); }

  std::string str() const {
    std::string s;
    for (size_t k = 0; k < header_.size(); ++k) s += (k ? "," : "") + header_[k];
    s += '\n';
    for (const auto& r : rows_) {
      for (size_t k = 0; k < r.size(); ++k) {
        if (k) s += ',';
        s += r[k];
      }
      s += '\n';
    }
    return s;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::istringstream l(line);
  std::string cell;
  while (std::getline(l, cell, ',')) cells.push_back(cell);
  return cells;
}

// Header and raw cells; rejects files with no data rows or ragged rows.
inline std::vector<std::vector<std::string>> parse_csv_cells(const std::string& text,
                                                            std::vector<std::string>* header = nullptr) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error("empty csv");
  const auto head = split_line(line);
  if (header) *header = head;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    auto r = split_line(line);
    if (r.size() != head.size()) throw Error("ragged csv row");
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<std::vector<double>> parse_csv(const std::string& text, std::vector<std::string>* header = nullptr) {
  std::vector<std::vector<double>> rows;
  for (const auto& r : parse_csv_cells(text, header)) {
    std::vector<double> v;
    for (const auto& c : r) v.push_back(std::stod(c));
    rows.push_back(std::move(v));
  }
  return rows;
}

struct ManifestEntry {
  std::string file;
  size_t bytes = 0;
  std::string sha256;
  int schema_version = kSchemaVersion;
};

// Files are staged in <dir>.partial and moved into place by commit(); an output set that is
// destroyed without commit leaves nothing behind.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)), stage_(dir_.string() + ".partial") {
    fs::remove_all(stage_);
    fs::create_directories(stage_);
  }
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(stage_, ec);
    }
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(stage_ / name, std::ios::binary);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("cannot write " + name);
    entries_.push_back({name, content.size(), sha256_hex(content), kSchemaVersion});
  }
  void write_csv(const std::string& name, const CsvTable& t) { write(name, t.str()); }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }
  void write_json_gz(const std::string& name, const json& j) { write(name, gzip(j.dump())); }

  const std::vector<ManifestEntry>& entries() const { return entries_; }

  void commit() {
    json m = json::array();
    for (const auto& e : entries_)
      m.push_back({{"file", e.file}, {"bytes", e.bytes}, {"sha256", e.sha256}, {"schema_version", e.schema_version}});
    const std::string text = m.dump(2) + "\n";
    std::ofstream(stage_ / "manifest.json", std::ios::binary) << text;
    fs::remove_all(dir_);
    fs::rename(stage_, dir_);
    committed_ = true;
  }

 private:
  fs::path dir_, stage_;
  std::vector<ManifestEntry> entries_;
  bool committed_ = false;
};

// Names of manifest entries whose file is missing or whose size or hash differs.
inline std::vector<std::string> verify_manifest(const fs::path& dir) {
  const json m = json::parse(read_file(dir / "manifest.json"));
  std::vector<std::string> bad;
  for (const auto& e : m) {
    const std::string name = e.at("file");
    const fs::path p = dir / name;
    if (!fs::exists(p)) {
      bad.push_back(name);
      continue;
    }
    const std::string data = read_file(p);
    if (data.size() != e.at("bytes").get<size_t>() || sha256_hex(data) != e.at("sha256").get<std::string>())
      bad.push_back(name);
  }
  return bad;
}

}  // namespace pol::io
