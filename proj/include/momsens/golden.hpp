#pragma once

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <tuple>

#include "momsens/csv.hpp"

namespace momsens {

struct GoldenCell {
  double value = 0.0;
  bool flagged = false;
};

// Keyed by (parameter, moment, measure).
using LongTable = std::map<std::tuple<std::string, std::string, std::string>, GoldenCell>;

inline LongTable parse_long_table(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty long-format table");
  LongTable t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5) throw IoError("bad long-format row: " + line);
    GoldenCell cell;
    cell.value = (f[3] == "inf" || f[3] == "+inf")
                     ? std::numeric_limits<double>::infinity()
                     : std::stod(f[3]);
    cell.flagged = !f[4].empty();
    t[{f[0], f[1], f[2]}] = cell;
  }
  return t;
}

inline LongTable load_long_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_long_table(ss.str());
}

struct GoldenTolerances {
  double rel = 0.05;        // applied when |golden| > small_cut
  double abs_small = 0.02;  // applied otherwise
  double small_cut = 0.05;
  std::map<std::string, double> rel_per_measure;  // per-block overrides
  std::map<std::string, double> abs_per_measure;

  double rel_for(const std::string& measure) const {
    const auto it = rel_per_measure.find(measure);
    return it == rel_per_measure.end() ? rel : it->second;
  }
  double abs_for(const std::string& measure) const {
    const auto it = abs_per_measure.find(measure);
    return it == abs_per_measure.end() ? abs_small : it->second;
  }
};

struct GoldenCheckResult {
  bool pass = true;
  int cells_compared = 0;
  double max_abs_deviation = 0.0;
  std::string detail;  // first few failures, one per line
};

// Cell-by-cell comparison. Identification flags must agree exactly; flagged
// cells carry no comparable magnitude (the digits there are noise artifacts of
// a singular system whose scale varies with the Jacobian's sampling error).
// Elsewhere: relative tolerance above the small cutoff, absolute below it.
inline GoldenCheckResult golden_check(const LongTable& produced, const LongTable& golden,
                                      const GoldenTolerances& tol = {}) {
  if (produced.size() < golden.size()) {
    throw ShapeMismatch("golden_check: produced table has fewer cells (" +
                        std::to_string(produced.size()) + ") than the golden (" +
                        std::to_string(golden.size()) + ")");
  }
  GoldenCheckResult out;
  int failures = 0;
  auto fail = [&](const std::string& msg) {
    out.pass = false;
    if (++failures <= 12) out.detail += msg + "\n";
  };
  for (const auto& [key, gold] : golden) {
    const auto it = produced.find(key);
    if (it == produced.end()) {
      throw ShapeMismatch("golden_check: missing cell " + std::get<0>(key) + "/" +
                          std::get<1>(key) + "/" + std::get<2>(key));
    }
    const GoldenCell& got = it->second;
    const std::string cell_name =
        std::get<2>(key) + "(" + std::get<0>(key) + ", " + std::get<1>(key) + ")";
    if (got.flagged != gold.flagged) {
      fail("flag mismatch at " + cell_name);
      continue;
    }
    ++out.cells_compared;
    if (gold.flagged) continue;
    const double dev = std::abs(got.value - gold.value);
    out.max_abs_deviation = std::max(out.max_abs_deviation, dev);
    const double allowed = std::abs(gold.value) > tol.small_cut
                               ? tol.rel_for(std::get<2>(key)) * std::abs(gold.value)
                               : tol.abs_for(std::get<2>(key));
    if (!(dev <= allowed)) {
      fail("deviation " + fmt_full(dev) + " > " + fmt_full(allowed) + " at " +
           cell_name + " (golden " + fmt_full(gold.value) + ", got " +
           fmt_full(got.value) + ")");
    }
  }
  return out;
}

}  // namespace momsens
