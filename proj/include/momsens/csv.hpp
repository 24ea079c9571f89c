#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "momsens/dataset.hpp"
#include "momsens/linalg.hpp"

namespace momsens {

// Full-precision decimal rendering that round-trips doubles exactly.
inline std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string fmt_fixed3(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

// Write-to-temp-then-rename so partially written outputs never appear.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out << content;
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// Quotes a field only when it needs it (embedded comma or quote).
inline std::string csv_field(const std::string& s) {
  if (s.find(',') == std::string::npos && s.find('"') == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// Row-major sparse-style matrix CSV with header "j,k,value" (1-based indices).
inline void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::string out = "j,k,value\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      out += std::to_string(r + 1) + "," + std::to_string(c + 1) + "," +
             fmt_full(m(r, c)) + "\n";
  atomic_write(path, out);
}

inline Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty matrix csv: " + path.string());
  std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> cells;
  Eigen::Index max_r = 0, max_c = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) throw IoError("bad matrix csv row: " + line);
    const Eigen::Index r = std::stoll(f[0]), c = std::stoll(f[1]);
    cells.emplace_back(r, c, std::stod(f[2]));
    max_r = std::max(max_r, r);
    max_c = std::max(max_c, c);
  }
  Matrix m = Matrix::Zero(max_r, max_c);
  for (const auto& [r, c, v] : cells) m(r - 1, c - 1) = v;
  return m;
}

inline void write_dataset_csv(const std::filesystem::path& path, const Dataset& d) {
  std::string out;
  for (Eigen::Index c = 0; c < d.columns(); ++c) {
    if (c) out += ",";
    out += d.names()[static_cast<size_t>(c)];
  }
  out += "\n";
  for (Eigen::Index r = 0; r < d.rows(); ++r) {
    for (Eigen::Index c = 0; c < d.columns(); ++c) {
      if (c) out += ",";
      out += fmt_full(d.col_at(static_cast<size_t>(c))(r));
    }
    out += "\n";
  }
  atomic_write(path, out);
}

inline Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty dataset csv: " + path.string());
  const auto names = split_csv_line(line);
  std::vector<std::vector<double>> cols(names.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != names.size()) throw IoError("ragged dataset csv row: " + line);
    for (size_t i = 0; i < f.size(); ++i) cols[i].push_back(std::stod(f[i]));
  }
  Dataset d;
  for (size_t i = 0; i < names.size(); ++i) {
    Vector v(static_cast<Eigen::Index>(cols[i].size()));
    for (size_t r = 0; r < cols[i].size(); ++r)
      v(static_cast<Eigen::Index>(r)) = cols[i][r];
    d.add_column(names[i], std::move(v));
  }
  return d;
}

}  // namespace momsens
