#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "lazydual/outer.hpp"

namespace lazydual {

inline std::string format_float(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline void emit_trace_csv(const RunTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace: " + path);
  out << "iter,subopt,consensus,messages,grad_evals,skips\n";
  for (const auto& row : trace.rows)
    out << row.iter << ',' << format_float(row.subopt) << ','
        << format_float(row.consensus) << ',' << row.messages << ','
        << row.grad_evals << ',' << row.skips << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline nlohmann::json trace_to_json(const RunTrace& trace) {
  nlohmann::json meta{{"method", method_name(trace.method)},
                      {"seed", trace.seed},
                      {"config_hash", trace.config_hash},
                      {"chebyshev_bypass", trace.chebyshev_bypass},
                      {"eta", trace.eta},
                      {"s", trace.s},
                      {"gamma", trace.gamma},
                      {"c", trace.c},
                      {"D", trace.D},
                      {"K", trace.K},
                      {"kappa", trace.kappa}};
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : trace.rows)
    rows.push_back({{"iter", row.iter},
                    {"subopt", row.subopt},
                    {"consensus", row.consensus},
                    {"messages", row.messages},
                    {"grad_evals", row.grad_evals},
                    {"skips", row.skips}});
  return {{"meta", meta}, {"rows", rows}};
}

inline void emit_trace_json(const RunTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace: " + path);
  out << trace_to_json(trace).dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

struct ParsedTraceRow {
  long iter;
  double subopt, consensus;
  long messages, grad_evals;
  int skips;
};

inline std::vector<ParsedTraceRow> parse_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read trace: " + path);
  std::vector<ParsedTraceRow> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    ParsedTraceRow row;
    char comma;
    ls >> row.iter >> comma >> row.subopt >> comma >> row.consensus >> comma >>
        row.messages >> comma >> row.grad_evals >> comma >> row.skips;
    if (!ls) throw std::runtime_error("malformed trace row in " + path);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace lazydual
