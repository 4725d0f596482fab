#pragma once

// JSON/CSV serialization for every report the CLI emits, plus atomic file
// writes (temp + rename). Every JSON report embeds the constants block it
// was computed with; doubles in CSV are printed with 17 significant digits
// so round trips are bit exact.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "ladderlab/constants.hpp"
#include "ladderlab/errors.hpp"
#include "ladderlab/fermat.hpp"
#include "ladderlab/ladder.hpp"
#include "ladderlab/proliferation.hpp"
#include "ladderlab/quadrature.hpp"
#include "ladderlab/raabe.hpp"

namespace ladderlab {

using json = nlohmann::json;

inline std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Writes `content` to `path` atomically. Throws io_error on failure.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    if (!out) throw io_error("atomic_write: cannot open " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw io_error("atomic_write: write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw io_error("atomic_write: rename failed: " + ec.message());
}

inline json constants_block(const LadderConfig& cfg) {
  return json{{"c", cfg.consts.euler_c},
              {"c0", cfg.c0},
              {"ln_two_pi", cfg.consts.ln_two_pi},
              {"one_minus_c", cfg.consts.one_minus_c()}};
}

// ---- DecompositionReport ---------------------------------------------------

inline json to_json(const DecompositionReport& report, const LadderConfig& cfg) {
  json rows = json::array();
  for (const auto& row : report.rows)
    rows.push_back(json{{"r", row.r},
                        {"lhs", row.lhs},
                        {"rhs", row.rhs},
                        {"residual", row.residual},
                        {"gap", row.gap}});
  return json{{"base_T", report.base_T},
              {"k", report.k},
              {"rows", rows},
              {"corollary_residual", report.corollary_residual},
              {"constant_used", report.constant_used},
              {"constants", constants_block(cfg)}};
}

inline std::string to_csv(const DecompositionReport& report) {
  std::string out = "r,lhs,rhs,residual,gap\n";
  for (const auto& row : report.rows) {
    out += std::to_string(row.r) + ',' + format_g17(row.lhs) + ',' + format_g17(row.rhs) + ',' +
           format_g17(row.residual) + ',' + format_g17(row.gap) + '\n';
  }
  return out;
}

// ---- increments ------------------------------------------------------------

inline json to_json(const std::vector<IncrementRow>& rows, double base_T, int k,
                    const LadderConfig& cfg) {
  json arr = json::array();
  for (const auto& row : rows)
    arr.push_back(json{{"r", row.r},
                       {"increment", row.increment},
                       {"expected", row.expected},
                       {"rel_dev", row.rel_dev}});
  return json{{"base_T", base_T}, {"k", k}, {"rows", arr}, {"constants", constants_block(cfg)}};
}

inline std::string to_csv(const std::vector<IncrementRow>& rows) {
  std::string out = "r,increment,expected,rel_dev\n";
  for (const auto& row : rows)
    out += std::to_string(row.r) + ',' + format_g17(row.increment) + ',' +
           format_g17(row.expected) + ',' + format_g17(row.rel_dev) + '\n';
  return out;
}

// ---- towers ----------------------------------------------------------------

inline json to_json(const ReverseTower& tower, const LadderConfig& cfg) {
  return json{{"base_T", tower.base_T},
              {"k", tower.k},
              {"levels", tower.levels},
              {"residuals", tower.residuals},
              {"constants", constants_block(cfg)}};
}

inline std::string to_csv(const ReverseTower& tower) {
  std::string out = "r,level,residual\n";
  for (std::size_t r = 0; r < tower.levels.size(); ++r) {
    out += std::to_string(r) + ',' + format_g17(tower.levels[r]) + ',' +
           format_g17(r == 0 ? 0.0 : tower.residuals[r - 1]) + '\n';
  }
  return out;
}

// ---- functional traces and equivalence entries ------------------------------

inline json points_json(const FunctionalTrace& trace) {
  json pts = json::array();
  for (const auto& p : trace.points)
    pts.push_back(json{{"tau", p.tau}, {"value", p.value}, {"residual", p.residual}});
  return pts;
}

inline json to_json(const FunctionalTrace& trace, const LadderConfig& cfg) {
  return json{{"target_x", trace.target_x},
              {"variant", to_string(trace.variant)},
              {"points", points_json(trace)},
              {"fit", json{{"C", trace.fit.C}, {"quality", trace.fit.quality}}},
              {"constants", constants_block(cfg)}};
}

inline std::string to_csv(const FunctionalTrace& trace) {
  std::string out = "tau,value,residual\n";
  for (const auto& p : trace.points)
    out += format_g17(p.tau) + ',' + format_g17(p.value) + ',' + format_g17(p.residual) + '\n';
  return out;
}

inline json to_json(const FermatRational& fr) {
  return json{{"x", fr.x},           {"y", fr.y},
              {"z", fr.z},           {"n", fr.n},
              {"num", fr.num.str()}, {"den", fr.den.str()},
              {"value", fr.value()}};
}

inline json to_json(const EquivalenceEntry& entry, const LadderConfig& cfg) {
  return json{{"rational", to_json(entry.rational)},
              {"variant", to_string(entry.trace.variant)},
              {"points", points_json(entry.trace)},
              {"fit", json{{"C", entry.trace.fit.C}, {"quality", entry.trace.fit.quality}}},
              {"band", entry.band},
              {"extrapolated_limit", entry.extrapolated_limit},
              {"flag", to_string(entry.flag)},
              {"constants", constants_block(cfg)}};
}

inline json to_json(const EquivalenceReport& report, const LadderConfig& cfg) {
  json entries = json::array();
  for (const auto& e : report.entries) entries.push_back(to_json(e, cfg));
  return json{{"variant", to_string(report.variant)},
              {"entries", entries},
              {"constants", constants_block(cfg)}};
}

// ---- gram ------------------------------------------------------------------

inline json to_json(const GramResult& gram, const ProliferationSpec& spec,
                    const LadderConfig& cfg) {
  return json{{"max_offdiag_normalized", gram.max_offdiag_normalized},
              {"diag", gram.diag},
              {"spec", json{{"base_T", spec.base_T},
                            {"generations", spec.generations},
                            {"N", spec.N},
                            {"quad_order", spec.quad_order}}},
              {"constants", constants_block(cfg)}};
}

inline std::string to_csv(const GramResult& gram) {
  std::string out;
  for (int r = 0; r < gram.n; ++r) {
    for (int c = 0; c < gram.n; ++c) {
      if (c) out += ',';
      out += format_g17(gram.matrix[static_cast<std::size_t>(r) * gram.n + c]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace ladderlab
