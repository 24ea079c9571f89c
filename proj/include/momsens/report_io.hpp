#pragma once

#include <cmath>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "momsens/csv.hpp"
#include "momsens/sensitivity.hpp"

namespace momsens {

inline const std::vector<std::string>& measure_names() {
  static const std::vector<std::string> names = {"M1", "E1", "E2", "E3",
                                                 "E4", "E5", "E6"};
  return names;
}

inline const Matrix& report_block(const SensitivityReport& r, const std::string& m) {
  if (m == "M1") return r.m1;
  if (m == "E1") return r.e1;
  if (m == "E2") return r.e2;
  if (m == "E3") return r.e3;
  if (m == "E4") return r.e4;
  if (m == "E5") return r.e5;
  if (m == "E6") return r.e6;
  throw ShapeMismatch("unknown measure block: " + m);
}

inline bool measure_uses_drop_flag(const std::string& m) {
  return m == "E4" || m == "E5";
}

// Long-format CSV: parameter,moment,measure,value,flag. Full precision; the
// flag column is "not_identified" on E4/E5 cells of flagged moment columns.
inline std::string report_to_long_csv(const SensitivityReport& r) {
  std::string out = "parameter,moment,measure,value,flag\n";
  for (const auto& m : measure_names()) {
    const Matrix& block = report_block(r, m);
    for (Eigen::Index i = 0; i < r.params(); ++i) {
      for (Eigen::Index k = 0; k < r.moments(); ++k) {
        const bool flagged = measure_uses_drop_flag(m) && !r.dropped_identified[k];
        out += csv_field(r.param_labels[i]) + "," + csv_field(r.moment_labels[k]) +
               "," + m + "," + fmt_full(block(i, k)) + "," +
               (flagged ? "not_identified" : "") + "\n";
      }
    }
  }
  return out;
}

namespace detail {

inline std::string render_cell(double v, bool flagged) {
  if (flagged) {
    if (!(v <= 100.0)) return ">100*";  // catches +inf and NaN-free blowups
    return fmt_fixed3(v) + "*";
  }
  return fmt_fixed3(v);
}

}  // namespace detail

// Blocked Markdown layout: one block per measure, parameters as rows and
// moments as columns, three decimals with signed zeros kept. Cells in E4/E5
// columns whose moment breaks identification when dropped are starred, values
// above 100 print as ">100*".
inline std::string report_to_markdown(const SensitivityReport& r,
                                      const std::string& title) {
  std::string out = "## " + title + "\n";
  bool any_flag = false;
  for (const auto& m : measure_names()) {
    const Matrix& block = report_block(r, m);
    out += "\n### " + m + "\n\n|  |";
    for (const auto& lbl : r.moment_labels) out += " " + lbl + " |";
    out += "\n|---|";
    for (Eigen::Index k = 0; k < r.moments(); ++k) out += "---:|";
    out += "\n";
    for (Eigen::Index i = 0; i < r.params(); ++i) {
      out += "| " + r.param_labels[i] + " |";
      for (Eigen::Index k = 0; k < r.moments(); ++k) {
        const bool flagged = measure_uses_drop_flag(m) && !r.dropped_identified[k];
        any_flag = any_flag || flagged;
        out += " " + detail::render_cell(block(i, k), flagged) + " |";
      }
      out += "\n";
    }
  }
  if (any_flag) {
    out +=
        "\n\\* not identified once this moment is dropped; starred values are "
        "unreliable.\n";
  }
  return out;
}

// One-parameter orientation (rows = moments, columns = E1..E6), the layout of
// the application's gamma tables.
inline std::string parameter_row_markdown(const SensitivityReport& r,
                                          Eigen::Index param,
                                          const std::string& title) {
  std::string out = "## " + title + "\n\n| # | Moment | E1 | E2 | E3 | E4 | E5 | E6 |\n";
  out += "|--:|---|---:|---:|---:|---:|---:|---:|\n";
  bool any_flag = false;
  for (Eigen::Index k = 0; k < r.moments(); ++k) {
    const bool flagged = !r.dropped_identified[k];
    any_flag = any_flag || flagged;
    out += "| " + std::to_string(k + 1) + " | " + r.moment_labels[k] + " |";
    out += " " + detail::render_cell(r.e1(param, k), false) + " |";
    out += " " + detail::render_cell(r.e2(param, k), false) + " |";
    out += " " + detail::render_cell(r.e3(param, k), false) + " |";
    out += " " + detail::render_cell(r.e4(param, k), flagged) + " |";
    out += " " + detail::render_cell(r.e5(param, k), flagged) + " |";
    out += " " + detail::render_cell(r.e6(param, k), false) + " |\n";
  }
  if (any_flag) {
    out +=
        "\n\\* not identified once this moment is dropped; starred values are "
        "unreliable.\n";
  }
  return out;
}

inline std::string parameter_row_csv(const SensitivityReport& r, Eigen::Index param) {
  std::string out = "moment_index,moment,E1,E2,E3,E4,E5,E6,flag\n";
  for (Eigen::Index k = 0; k < r.moments(); ++k) {
    out += std::to_string(k + 1) + "," + csv_field(r.moment_labels[k]);
    for (const Matrix* b : {&r.e1, &r.e2, &r.e3, &r.e4, &r.e5, &r.e6}) {
      out += "," + fmt_full((*b)(param, k));
    }
    out += std::string(",") + (r.dropped_identified[k] ? "" : "not_identified") + "\n";
  }
  return out;
}

}  // namespace momsens
