#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "jdts/consistency.hpp"
#include "jdts/nelson_siegel.hpp"
#include "jdts/separable.hpp"
#include "jdts/simulate.hpp"

namespace jdts {

// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_u64(std::uint64_t v) {
  char buf[24];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// RFC-4180 row writer: CRLF line endings, cells quoted only when they contain
// a delimiter, quote, or line break.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) os_ << ',';
      write_cell(cells[i]);
    }
    os_ << "\r\n";
  }

 private:
  void write_cell(const std::string& cell) {
    if (cell.find_first_of(",\"\r\n") == std::string::npos) {
      os_ << cell;
      return;
    }
    os_ << '"';
    for (char ch : cell) {
      if (ch == '"') os_ << '"';
      os_ << ch;
    }
    os_ << '"';
  }

  std::ostream& os_;
};

inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  return out;
}

// Single-line JSON object builder with insertion-ordered keys, so a fixed
// call sequence yields byte-identical output. Non-finite numbers become
// quoted strings ("inf", "-inf", "nan") since JSON has no literal for them.
class JsonObject {
 public:
  JsonObject& field(const std::string& k, double v) {
    return raw(k, std::isfinite(v) ? format_double(v)
                                   : "\"" + format_double(v) + "\"");
  }
  JsonObject& field(const std::string& k, bool v) {
    return raw(k, v ? "true" : "false");
  }
  JsonObject& field(const std::string& k, std::uint64_t v) {
    return raw(k, format_u64(v));
  }
  JsonObject& field(const std::string& k, int v) {
    return raw(k, std::to_string(v));
  }
  JsonObject& field(const std::string& k, const std::string& v) {
    return raw(k, "\"" + json_escape(v) + "\"");
  }
  JsonObject& field(const std::string& k, const char* v) {
    return field(k, std::string(v));
  }
  JsonObject& raw(const std::string& k, const std::string& rendered) {
    body_ += first_ ? "" : ",";
    body_ += "\"" + json_escape(k) + "\":" + rendered;
    first_ = false;
    return *this;
  }
  std::string str() const { return "{" + body_ + "}"; }

 private:
  std::string body_;
  bool first_ = true;
};

inline std::string json_array(const std::vector<std::string>& rendered) {
  std::string out = "[";
  for (std::size_t i = 0; i < rendered.size(); ++i) {
    if (i > 0) out += ",";
    out += rendered[i];
  }
  return out + "]";
}

inline std::string json_number_array(const Vec& v) {
  std::vector<std::string> cells;
  cells.reserve(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) cells.push_back(format_double(v[i]));
  return json_array(cells);
}

inline std::string json_matrix(const Mat& m) {
  std::vector<std::string> rows;
  rows.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    rows.push_back(json_number_array(m.row(i).transpose()));
  return json_array(rows);
}

// --- table writers ----------------------------------------------------------

inline void write_residual_csv(std::ostream& os, const ResidualReport& rep,
                               std::size_t dim) {
  CsvWriter csv(os);
  std::vector<std::string> head{"tau"};
  for (std::size_t i = 1; i <= dim; ++i) head.push_back("x" + std::to_string(i));
  for (const char* c : {"residual", "term_drift", "term_diff", "term_cross",
                        "term_jump", "term_dtau"})
    head.push_back(c);
  csv.row(head);
  for (const auto& node : rep.nodes) {
    std::vector<std::string> cells{format_double(node.tau)};
    for (Eigen::Index i = 0; i < node.x.size(); ++i)
      cells.push_back(format_double(node.x[i]));
    cells.push_back(format_double(node.terms.residual));
    cells.push_back(format_double(node.terms.drift_term));
    cells.push_back(format_double(node.terms.diffusion_term));
    cells.push_back(format_double(node.terms.cross_term));
    cells.push_back(format_double(node.terms.jump_term));
    cells.push_back(format_double(node.terms.dtau_term));
    csv.row(cells);
  }
}

inline std::string residual_json(const ResidualReport& rep, double eps) {
  JsonObject o;
  o.field("consistent", rep.consistent(eps))
      .field("max_abs_residual", rep.max_abs)
      .field("rms_residual", rep.rms)
      .field("tolerance", eps)
      .field("nodes", rep.nodes.size())
      .field("failures", rep.failures.size());
  if (!rep.failures.empty()) o.field("first_failure", rep.failures.front().what);
  return o.str();
}

inline void write_hpath_csv(std::ostream& os, const HPath& path,
                            const std::vector<double>& tau_grid) {
  CsvWriter csv(os);
  const auto m = static_cast<std::size_t>(path.H(0.0).size());
  std::vector<std::string> head{"tau"};
  for (std::size_t k = 0; k < m; ++k) head.push_back("H_" + std::to_string(k));
  for (std::size_t k = 0; k < m; ++k) head.push_back("h_" + std::to_string(k));
  csv.row(head);
  for (double tau : tau_grid) {
    const Vec H = path.H(tau);
    const Vec h = path.h(tau);
    std::vector<std::string> cells{format_double(tau)};
    for (Eigen::Index k = 0; k < H.size(); ++k) cells.push_back(format_double(H[k]));
    for (Eigen::Index k = 0; k < h.size(); ++k) cells.push_back(format_double(h[k]));
    csv.row(cells);
  }
}

inline void write_yield_csv(std::ostream& os, const YieldCurve& yc) {
  CsvWriter csv(os);
  csv.row({"tau", "price", "yield"});
  for (std::size_t i = 0; i < yc.tau.size(); ++i)
    csv.row({format_double(yc.tau[i]), format_double(yc.price[i]),
             format_double(yc.yield[i])});
}

inline void write_path_csv(std::ostream& os, const SimPath& path) {
  CsvWriter csv(os);
  const std::size_t n =
      path.states.empty() ? 0 : static_cast<std::size_t>(path.states.front().size());
  std::vector<std::string> head{"t"};
  for (std::size_t i = 1; i <= n; ++i) head.push_back("x" + std::to_string(i));
  head.push_back("jump");
  csv.row(head);
  std::size_t next_jump = 0;
  for (std::size_t i = 0; i < path.times.size(); ++i) {
    std::vector<std::string> cells{format_double(path.times[i])};
    for (Eigen::Index k = 0; k < path.states[i].size(); ++k)
      cells.push_back(format_double(path.states[i][k]));
    bool jumped = false;
    while (next_jump < path.jumps.size() &&
           path.jumps[next_jump].time <= path.times[i]) {
      jumped = jumped || path.jumps[next_jump].time == path.times[i];
      ++next_jump;
    }
    cells.push_back(jumped ? "1" : "0");
    csv.row(cells);
  }
}

inline std::string mc_estimate_json(const MCEstimate& est) {
  return JsonObject()
      .field("mean", est.mean)
      .field("std_error", est.std_error)
      .field("n_paths", est.n_paths)
      .field("flagged_paths", est.flagged)
      .field("max_jump_prob", est.max_jump_prob)
      .str();
}

inline std::string martingale_json(const MartingaleReport& rep) {
  return JsonObject()
      .field("mean_discounted", rep.discounted.mean)
      .field("std_error", rep.discounted.std_error)
      .field("reference", rep.reference)
      .field("z", rep.z)
      .field("n_paths", rep.discounted.n_paths)
      .field("flagged_paths", rep.discounted.flagged)
      .str();
}

inline std::string recovered_json(const RecoveredCoefficients& rec) {
  return JsonObject()
      .raw("b", json_number_array(rec.b))
      .raw("a", json_matrix(rec.a))
      .field("lambda", rec.lambda)
      .field("residual_norm", rec.residual_norm)
      .field("condition", rec.condition)
      .field("rank_deficient", rec.rank_deficient)
      .str();
}

inline void write_scan_csv(std::ostream& os, const NSScanReport& rep) {
  CsvWriter csv(os);
  csv.row({"tau", "x1", "x2", "x3", "x4", "residual"});
  for (const auto& node : rep.nodes)
    csv.row({format_double(node.tau), format_double(node.state.x1),
             format_double(node.state.x2), format_double(node.state.x3),
             format_double(node.state.x4), format_double(node.residual)});
}

inline void write_q_table_csv(std::ostream& os,
                              const std::vector<NSQDiscrepancy>& rows) {
  CsvWriter csv(os);
  csv.row({"coefficient", "printed", "verified", "abs_diff"});
  for (const auto& r : rows)
    csv.row({r.name, format_double(r.paper), format_double(r.verified),
             format_double(r.abs_diff)});
}

inline std::string scan_json(const NSScanReport& rep,
                             const std::vector<NSQDiscrepancy>& table) {
  std::vector<std::string> entries;
  entries.reserve(table.size());
  for (const auto& r : table)
    entries.push_back(JsonObject()
                          .field("coefficient", r.name)
                          .field("printed", r.paper)
                          .field("verified", r.verified)
                          .field("abs_diff", r.abs_diff)
                          .str());
  return JsonObject()
      .field("verdict", rep.verdict())
      .field("max_residual", rep.max_residual)
      .field("trivial_dynamics", rep.trivial_dynamics)
      .raw("coefficient_table", json_array(entries))
      .str();
}

}  // namespace jdts
