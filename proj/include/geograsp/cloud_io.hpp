#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "geograsp/cloud.hpp"

namespace geograsp {

enum class CloudFormat { PcdAscii, PlyAscii, Auto };

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline double parse_double(std::string_view tok, std::size_t line_no) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError("line " + std::to_string(line_no) + ": bad number '" + std::string(tok) + "'");
  if (!std::isfinite(v))
    throw ParseError("line " + std::to_string(line_no) + ": non-finite coordinate");
  return v;
}

inline std::size_t parse_count(std::string_view tok, std::size_t line_no) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError("line " + std::to_string(line_no) + ": bad count '" + std::string(tok) + "'");
  return v;
}

/// Shortest representation that round-trips exactly; locale independent.
inline void append_number(std::string& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

inline std::string format_xyz(const Point3& p) {
  std::string s;
  append_number(s, p.x());
  s += ' ';
  append_number(s, p.y());
  s += ' ';
  append_number(s, p.z());
  return s;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return ss.str();
}

/// Line cursor over an in-memory file; tracks 1-based line numbers.
class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  std::optional<std::string_view> next() {
    if (pos_ >= text_.size()) return std::nullopt;
    std::size_t end = text_.find('\n', pos_);
    if (end == std::string_view::npos) end = text_.size();
    std::string_view line = text_.substr(pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = end + 1;
    ++line_no_;
    return line;
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

inline PointCloud parse_pcd(std::string_view text) {
  LineReader reader(text);
  std::vector<std::string> fields;
  std::vector<std::size_t> counts;
  std::optional<std::size_t> points, width, height;
  bool saw_data = false;

  while (auto line = reader.next()) {
    const auto toks = split_ws(*line);
    if (toks.empty() || toks[0].front() == '#') continue;
    const std::string_view key = toks[0];
    const std::size_t ln = reader.line_no();
    if (key == "VERSION" || key == "SIZE" || key == "TYPE" || key == "VIEWPOINT") {
      continue;
    } else if (key == "FIELDS") {
      for (std::size_t i = 1; i < toks.size(); ++i) fields.emplace_back(toks[i]);
    } else if (key == "COUNT") {
      for (std::size_t i = 1; i < toks.size(); ++i) counts.push_back(parse_count(toks[i], ln));
    } else if (key == "WIDTH" && toks.size() == 2) {
      width = parse_count(toks[1], ln);
    } else if (key == "HEIGHT" && toks.size() == 2) {
      height = parse_count(toks[1], ln);
    } else if (key == "POINTS" && toks.size() == 2) {
      points = parse_count(toks[1], ln);
    } else if (key == "DATA") {
      if (toks.size() != 2 || toks[1] != "ascii")
        throw ParseError("only 'DATA ascii' PCD files are supported");
      saw_data = true;
      break;
    } else {
      throw ParseError("line " + std::to_string(ln) + ": unexpected PCD header entry '" + std::string(key) + "'");
    }
  }
  if (!saw_data) throw ParseError("PCD header has no DATA line");
  if (fields.empty()) throw ParseError("PCD header has no FIELDS line");
  if (counts.empty()) counts.assign(fields.size(), 1);
  if (counts.size() != fields.size()) throw ParseError("PCD COUNT and FIELDS disagree in length");
  if (!points) {
    if (!width) throw ParseError("PCD header declares neither POINTS nor WIDTH");
    points = *width * height.value_or(1);
  }

  std::size_t columns = 0;
  std::optional<std::size_t> cx, cy, cz;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i] == "x") cx = columns;
    if (fields[i] == "y") cy = columns;
    if (fields[i] == "z") cz = columns;
    columns += counts[i];
  }
  if (!cx || !cy || !cz) throw ParseError("PCD FIELDS must include x y z");

  PointCloud cloud(Frame::Camera);
  cloud.points.reserve(*points);
  while (auto line = reader.next()) {
    const auto toks = split_ws(*line);
    if (toks.empty()) continue;
    const std::size_t ln = reader.line_no();
    if (toks.size() < columns)
      throw ParseError("line " + std::to_string(ln) + ": expected " + std::to_string(columns) + " values");
    if (cloud.size() == *points)
      throw ParseError("more data rows than the declared " + std::to_string(*points) + " points");
    cloud.points.emplace_back(parse_double(toks[*cx], ln), parse_double(toks[*cy], ln),
                              parse_double(toks[*cz], ln));
  }
  if (cloud.size() != *points)
    throw ParseError("declared " + std::to_string(*points) + " points but found " + std::to_string(cloud.size()));
  return cloud;
}

inline PointCloud parse_ply(std::string_view text) {
  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> properties;
  };

  LineReader reader(text);
  auto magic = reader.next();
  if (!magic || split_ws(*magic) != std::vector<std::string_view>{"ply"}) throw ParseError("missing 'ply' magic line");

  std::vector<Element> elements;
  bool saw_format = false, saw_end = false;
  while (auto line = reader.next()) {
    const auto toks = split_ws(*line);
    if (toks.empty()) continue;
    const std::size_t ln = reader.line_no();
    if (toks[0] == "comment" || toks[0] == "obj_info") continue;
    if (toks[0] == "format") {
      if (toks.size() != 3 || toks[1] != "ascii" || toks[2] != "1.0")
        throw ParseError("only 'format ascii 1.0' PLY files are supported");
      saw_format = true;
    } else if (toks[0] == "element") {
      if (toks.size() != 3) throw ParseError("line " + std::to_string(ln) + ": malformed element line");
      elements.push_back({std::string(toks[1]), parse_count(toks[2], ln), {}});
    } else if (toks[0] == "property") {
      if (elements.empty() || toks.size() < 3)
        throw ParseError("line " + std::to_string(ln) + ": property outside an element");
      elements.back().properties.emplace_back(toks.back());
      if (toks[1] == "list" && elements.back().name == "vertex")
        throw ParseError("list properties on vertices are not supported");
    } else if (toks[0] == "end_header") {
      saw_end = true;
      break;
    } else {
      throw ParseError("line " + std::to_string(ln) + ": unexpected PLY header entry '" + std::string(toks[0]) + "'");
    }
  }
  if (!saw_format) throw ParseError("PLY header has no format line");
  if (!saw_end) throw ParseError("PLY header has no end_header");

  PointCloud cloud(Frame::Camera);
  bool saw_vertex = false;
  for (const auto& el : elements) {
    if (el.name != "vertex") {
      for (std::size_t i = 0; i < el.count; ++i) {
        std::optional<std::string_view> line;
        do {
          line = reader.next();
        } while (line && split_ws(*line).empty());
        if (!line) throw ParseError("file ends inside element '" + el.name + "'");
      }
      continue;
    }
    if (saw_vertex) throw ParseError("more than one vertex element");
    saw_vertex = true;
    std::optional<std::size_t> cx, cy, cz;
    for (std::size_t i = 0; i < el.properties.size(); ++i) {
      if (el.properties[i] == "x") cx = i;
      if (el.properties[i] == "y") cy = i;
      if (el.properties[i] == "z") cz = i;
    }
    if (!cx || !cy || !cz) throw ParseError("vertex element must have x, y, z properties");
    cloud.points.reserve(el.count);
    while (cloud.size() < el.count) {
      auto line = reader.next();
      if (!line)
        throw ParseError("declared " + std::to_string(el.count) + " vertices but found " + std::to_string(cloud.size()));
      const auto toks = split_ws(*line);
      if (toks.empty()) continue;
      const std::size_t ln = reader.line_no();
      if (toks.size() != el.properties.size())
        throw ParseError("line " + std::to_string(ln) + ": expected " + std::to_string(el.properties.size()) + " values");
      cloud.points.emplace_back(parse_double(toks[*cx], ln), parse_double(toks[*cy], ln),
                                parse_double(toks[*cz], ln));
    }
  }
  if (!saw_vertex) throw ParseError("PLY has no vertex element");
  while (auto line = reader.next()) {
    if (!split_ws(*line).empty()) throw ParseError("trailing data after the declared elements");
  }
  return cloud;
}

inline CloudFormat sniff_format(const std::filesystem::path& path, std::string_view text) {
  const auto ext = path.extension().string();
  if (ext == ".pcd" || ext == ".PCD") return CloudFormat::PcdAscii;
  if (ext == ".ply" || ext == ".PLY") return CloudFormat::PlyAscii;
  if (text.substr(0, 3) == "ply") return CloudFormat::PlyAscii;
  return CloudFormat::PcdAscii;
}

}  // namespace detail

inline CloudFormat format_from_string(std::string_view s) {
  if (s == "pcd" || s == "pcd-ascii") return CloudFormat::PcdAscii;
  if (s == "ply" || s == "ply-ascii") return CloudFormat::PlyAscii;
  if (s == "auto") return CloudFormat::Auto;
  throw InvalidArgument("unknown cloud format '" + std::string(s) + "'");
}

inline PointCloud parse_cloud(std::string_view text, CloudFormat format) {
  if (format == CloudFormat::PlyAscii) return detail::parse_ply(text);
  if (format == CloudFormat::PcdAscii) return detail::parse_pcd(text);
  throw InvalidArgument("parse_cloud needs a concrete format");
}

/// Reads an ASCII PCD or PLY file. The returned cloud is labeled `camera`;
/// attributes other than x, y, z are skipped.
inline PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format = CloudFormat::Auto) {
  const std::string text = detail::read_file(path);
  if (format == CloudFormat::Auto) format = detail::sniff_format(path, text);
  return parse_cloud(text, format);
}

inline std::string serialize_cloud(const PointCloud& cloud, CloudFormat format) {
  std::string out;
  const std::string n = std::to_string(cloud.size());
  if (format == CloudFormat::PlyAscii) {
    out += "ply\nformat ascii 1.0\nelement vertex " + n +
           "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  } else if (format == CloudFormat::PcdAscii) {
    out += "# .PCD v0.7 - Point Cloud Data file format\nVERSION 0.7\nFIELDS x y z\nSIZE 8 8 8\nTYPE F F F\n"
           "COUNT 1 1 1\nWIDTH " + n + "\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\nPOINTS " + n + "\nDATA ascii\n";
  } else {
    throw InvalidArgument("serialize_cloud needs a concrete format");
  }
  for (const auto& p : cloud.points) {
    out += detail::format_xyz(p);
    out += '\n';
  }
  return out;
}

/// Writes `contents` to a sibling temp file and renames it over `path`.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path.string() + "'");
  }
}

inline void save_cloud(const PointCloud& cloud, const std::filesystem::path& path, CloudFormat format) {
  if (format == CloudFormat::Auto) format = detail::sniff_format(path, {});
  write_file_atomic(path, serialize_cloud(cloud, format));
}

}  // namespace geograsp
