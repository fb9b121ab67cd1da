#pragma once

// Deterministic artifact plumbing: CSV tables with shortest round-trip double
// formatting, FNV-1a content hashes, a manifest tying every written file to
// the scenario that produced it, and Wavefront OBJ meshes restricted to
// v/f records.  Nothing here may depend on wall-clock time or iteration
// order of hashed containers: byte-identical reruns are a contract.

#include <Eigen/Dense>
#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "twistlab/errors.hpp"

namespace twistlab {

// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string fnv1a64_hex(std::string_view bytes) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a64(bytes);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[std::size_t(i)] = digits[h & 0xf];
  return out;
}

struct CsvCell {
  std::string text;
  CsvCell(const char* s) : text(s) {}
  CsvCell(std::string s) : text(std::move(s)) {}
  CsvCell(double v) : text(format_double(v)) {}
  CsvCell(int v) : text(std::to_string(v)) {}
  CsvCell(long v) : text(std::to_string(v)) {}
  CsvCell(std::size_t v) : text(std::to_string(v)) {}
  CsvCell(bool v) : text(v ? "1" : "0") {}
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  explicit CsvTable(std::vector<std::string> h) : header(std::move(h)) {}

  void add_row(std::initializer_list<CsvCell> cells) {
    if (cells.size() != header.size())
      throw ConfigError("csv row width does not match the header");
    std::vector<std::string> row;
    row.reserve(cells.size());
    for (const CsvCell& c : cells) {
      for (const char ch : c.text)
        if (ch == ',' || ch == '\n' || ch == '"')
          throw ConfigError("csv cell contains a delimiter: " + c.text);
      row.push_back(c.text);
    }
    rows.push_back(std::move(row));
  }

  std::string to_bytes() const {
    std::string out;
    auto join = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out.push_back(',');
        out += cells[i];
      }
      out.push_back('\n');
    };
    join(header);
    for (const auto& r : rows) join(r);
    return out;
  }
};

struct Artifact {
  std::string name;
  std::string bytes;
  std::string hash;
};

// Collects artifacts in memory, then writes them plus a manifest in one go.
// The manifest JSON is assembled textually with sorted, fixed field order so
// reruns are byte-identical.
struct ArtifactSet {
  std::vector<Artifact> items;

  void add(const std::string& name, std::string bytes) {
    for (const Artifact& a : items)
      if (a.name == name) throw ConfigError("duplicate artifact name: " + name);
    Artifact art;
    art.name = name;
    art.hash = fnv1a64_hex(bytes);
    art.bytes = std::move(bytes);
    items.push_back(std::move(art));
  }

  std::string manifest_bytes(const std::string& scenario_name,
                             const std::string& scenario_hash,
                             const std::string& config_json) const {
    std::string m;
    m += "{\n";
    m += "  \"scenario\": \"" + scenario_name + "\",\n";
    m += "  \"scenario_hash\": \"" + scenario_hash + "\",\n";
    m += "  \"artifacts\": [\n";
    for (std::size_t i = 0; i < items.size(); ++i) {
      m += "    {\"file\": \"" + items[i].name + "\", \"bytes\": " +
           std::to_string(items[i].bytes.size()) + ", \"fnv1a64\": \"" + items[i].hash +
           "\"}";
      m += (i + 1 < items.size()) ? ",\n" : "\n";
    }
    m += "  ],\n";
    m += "  \"config\": " + config_json + "\n";
    m += "}\n";
    return m;
  }

  // Writes every artifact and manifest.json under dir; returns manifest path.
  std::filesystem::path write_all(const std::filesystem::path& dir,
                                  const std::string& scenario_name,
                                  const std::string& scenario_hash,
                                  const std::string& config_json) const {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string());
    auto put = [&dir](const std::string& name, const std::string& bytes) {
      const std::filesystem::path p = dir / name;
      std::ofstream f(p, std::ios::binary | std::ios::trunc);
      if (!f) throw ConfigError("cannot write " + p.string());
      f.write(bytes.data(), std::streamsize(bytes.size()));
      if (!f) throw ConfigError("short write on " + p.string());
    };
    for (const Artifact& a : items) put(a.name, a.bytes);
    const std::string manifest = manifest_bytes(scenario_name, scenario_hash, config_json);
    put("manifest.json", manifest);
    return dir / "manifest.json";
  }
};

struct ObjMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 4>> quads;  // zero-based vertex ids

  std::string to_bytes() const {
    std::string out;
    for (const auto& v : vertices) {
      out += "v " + format_double(v.x()) + " " + format_double(v.y()) + " " +
             format_double(v.z()) + "\n";
    }
    for (const auto& q : quads) {
      out += "f";
      for (const int id : q) {
        if (id < 0 || id >= int(vertices.size()))
          throw ConfigError("obj face references a missing vertex");
        out += " " + std::to_string(id + 1);
      }
      out += "\n";
    }
    return out;
  }
};

}  // namespace twistlab
