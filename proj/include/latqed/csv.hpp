#pragma once

#include <boost/crc.hpp>

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "latqed/error.hpp"

namespace latqed::csv {

/// Shortest text that is locale independent: 17 significant digits for reals.
inline void append(std::string& out, double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  out.append(buf, r.ptr);
}
inline void append(std::string& out, long long v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, r.ptr);
}
inline void append(std::string& out, int v) { append(out, static_cast<long long>(v)); }
inline void append(std::string& out, std::size_t v) { append(out, static_cast<long long>(v)); }
inline void append(std::string& out, bool v) { out += v ? '1' : '0'; }
inline void append(std::string& out, std::string_view v) { out += v; }
inline void append(std::string& out, const char* v) { out += v; }
inline void append(std::string& out, const std::string& v) { out += v; }

/// In-memory table; the header row is fixed at construction.
class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {
    for (std::size_t i = 0; i < columns_.size(); ++i) text_ += (i ? "," : "") + columns_[i];
    text_ += '\n';
  }

  template <class... Ts>
  void row(const Ts&... values) {
    if (sizeof...(Ts) != columns_.size())
      throw NumericError("csv: row width " + std::to_string(sizeof...(Ts)) + " != " +
                         std::to_string(columns_.size()) + " columns");
    bool first = true;
    ((text_ += first ? "" : ",", first = false, append(text_, values)), ...);
    text_ += '\n';
  }

  const std::string& text() const { return text_; }

 private:
  std::vector<std::string> columns_;
  std::string text_;
};

struct WrittenFile {
  std::string name;
  std::uint32_t crc32 = 0;
  std::size_t bytes = 0;
};

inline std::uint32_t crc32(std::string_view data) {
  boost::crc_32_type crc;
  crc.process_bytes(data.data(), data.size());
  return crc.checksum();
}

/// Writes files into one directory and remembers their checksums.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  void write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot open " + path.string() + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw ConfigError("write failed: " + path.string());
    files_.push_back({name, crc32(content), content.size()});
  }
  void write(const std::string& name, const Table& table) { write(name, table.text()); }

  const std::filesystem::path& path() const { return dir_; }
  const std::vector<WrittenFile>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<WrittenFile> files_;
};

/// key = value text with the same number formatting as the tables.
class KeyValue {
 public:
  template <class T>
  void add(std::string_view key, const T& value) {
    text_ += key;
    text_ += " = ";
    append(text_, value);
    text_ += '\n';
  }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

}  // namespace latqed::csv
