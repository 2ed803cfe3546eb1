#pragma once

// CSV/JSON serialization of slice tables. Floats are printed with 17
// significant digits so that re-parsing an export reproduces identical
// doubles bit for bit.

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsteer/errors.hpp"
#include "qsteer/regions.hpp"

namespace qsteer {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline constexpr std::string_view kSliceCsvHeader =
    "ray,w,z,r_physical,r_ppt,r_bowles,r_mapped,r_hull,u_star,v_star,converged,label";

inline void write_csv(std::ostream& os, const SliceTable& table) {
  const SliceMetadata& m = table.meta;
  os << "# figure=" << m.figure << "\n";
  os << "# a=" << format_double(m.a) << "\n";
  os << "# ratio=" << format_double(m.ratio) << "\n";
  os << "# beta=" << format_double(m.beta) << "\n";
  os << "# resolution=" << m.resolution << "\n";
  os << "# order=" << m.order << "\n";
  os << "# tol=" << format_double(m.tol) << "\n";
  os << "# convergence_g=" << format_double(m.convergence_g) << "\n";
  os << "# convergence_g_refined=" << format_double(m.convergence_g_refined) << "\n";
  os << "# version=" << m.version << "\n";
  os << "# generated_at=" << m.generated_at << "\n";
  os << kSliceCsvHeader << "\n";
  for (const SliceRow& r : table.rows) {
    os << format_double(r.ray) << ',' << format_double(r.w) << ',' << format_double(r.z)
       << ',' << format_double(r.r_physical) << ',' << format_double(r.r_ppt) << ','
       << format_double(r.r_bowles) << ',' << format_double(r.r_mapped) << ','
       << format_double(r.r_hull) << ',' << format_double(r.u_star) << ','
       << format_double(r.v_star) << ',' << (r.converged ? 1 : 0) << ','
       << to_string(r.label) << "\n";
  }
}

inline SliceTable read_csv(std::istream& is) {
  SliceTable table;
  std::string line;
  bool saw_header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(2, eq - 2);
      std::string val = line.substr(eq + 1);
      SliceMetadata& m = table.meta;
      if (key == "figure") m.figure = val;
      else if (key == "a") m.a = std::strtod(val.c_str(), nullptr);
      else if (key == "ratio") m.ratio = std::strtod(val.c_str(), nullptr);
      else if (key == "beta") m.beta = std::strtod(val.c_str(), nullptr);
      else if (key == "resolution") m.resolution = std::atoi(val.c_str());
      else if (key == "order") m.order = std::atoi(val.c_str());
      else if (key == "tol") m.tol = std::strtod(val.c_str(), nullptr);
      else if (key == "convergence_g") m.convergence_g = std::strtod(val.c_str(), nullptr);
      else if (key == "convergence_g_refined")
        m.convergence_g_refined = std::strtod(val.c_str(), nullptr);
      else if (key == "version") m.version = val;
      else if (key == "generated_at") m.generated_at = val;
      continue;
    }
    if (!saw_header) {
      if (line != kSliceCsvHeader) throw invalid_input("read_csv: unexpected header row");
      saw_header = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 12) throw invalid_input("read_csv: malformed data row");
    SliceRow r;
    r.ray = std::strtod(fields[0].c_str(), nullptr);
    r.w = std::strtod(fields[1].c_str(), nullptr);
    r.z = std::strtod(fields[2].c_str(), nullptr);
    r.r_physical = std::strtod(fields[3].c_str(), nullptr);
    r.r_ppt = std::strtod(fields[4].c_str(), nullptr);
    r.r_bowles = std::strtod(fields[5].c_str(), nullptr);
    r.r_mapped = std::strtod(fields[6].c_str(), nullptr);
    r.r_hull = std::strtod(fields[7].c_str(), nullptr);
    r.u_star = std::strtod(fields[8].c_str(), nullptr);
    r.v_star = std::strtod(fields[9].c_str(), nullptr);
    r.converged = fields[10] == "1";
    const auto label = region_label_from_string(fields[11]);
    if (!label) throw invalid_input("read_csv: unknown region label");
    r.label = *label;
    table.rows.push_back(r);
  }
  if (!saw_header) throw invalid_input("read_csv: missing header row");
  return table;
}

inline nlohmann::json to_json(const SliceTable& table) {
  const SliceMetadata& m = table.meta;
  nlohmann::json meta{
      {"figure", m.figure},
      {"a", m.a},
      {"ratio", m.ratio},
      {"beta", m.beta},
      {"resolution", m.resolution},
      {"order", m.order},
      {"tol", m.tol},
      {"convergence_g", m.convergence_g},
      {"convergence_g_refined", m.convergence_g_refined},
      {"version", m.version},
      {"generated_at", m.generated_at},
  };
  nlohmann::json rows = nlohmann::json::array();
  for (const SliceRow& r : table.rows) {
    rows.push_back({
        {"ray", r.ray},
        {"w", r.w},
        {"z", r.z},
        {"r_physical", r.r_physical},
        {"r_ppt", r.r_ppt},
        {"r_bowles", r.r_bowles},
        {"r_mapped", r.r_mapped},
        {"r_hull", r.r_hull},
        {"u_star", r.u_star},
        {"v_star", r.v_star},
        {"converged", r.converged},
        {"label", std::string(to_string(r.label))},
    });
  }
  return nlohmann::json{{"metadata", meta}, {"rows", rows}};
}

inline void write_json(std::ostream& os, const SliceTable& table) {
  os << to_json(table).dump(2) << "\n";
}

inline SliceTable read_json(std::istream& is) {
  nlohmann::json j;
  is >> j;
  SliceTable table;
  const auto& m = j.at("metadata");
  table.meta.figure = m.at("figure").get<std::string>();
  table.meta.a = m.at("a").get<double>();
  table.meta.ratio = m.at("ratio").get<double>();
  table.meta.beta = m.at("beta").get<double>();
  table.meta.resolution = m.at("resolution").get<int>();
  table.meta.order = m.at("order").get<int>();
  table.meta.tol = m.at("tol").get<double>();
  table.meta.convergence_g = m.at("convergence_g").get<double>();
  table.meta.convergence_g_refined = m.at("convergence_g_refined").get<double>();
  table.meta.version = m.at("version").get<std::string>();
  table.meta.generated_at = m.at("generated_at").get<std::string>();
  for (const auto& jr : j.at("rows")) {
    SliceRow r;
    r.ray = jr.at("ray").get<double>();
    r.w = jr.at("w").get<double>();
    r.z = jr.at("z").get<double>();
    r.r_physical = jr.at("r_physical").get<double>();
    r.r_ppt = jr.at("r_ppt").get<double>();
    r.r_bowles = jr.at("r_bowles").get<double>();
    r.r_mapped = jr.at("r_mapped").get<double>();
    r.r_hull = jr.at("r_hull").get<double>();
    r.u_star = jr.at("u_star").get<double>();
    r.v_star = jr.at("v_star").get<double>();
    r.converged = jr.at("converged").get<bool>();
    const auto label = region_label_from_string(jr.at("label").get<std::string>());
    if (!label) throw invalid_input("read_json: unknown region label");
    r.label = *label;
    table.rows.push_back(r);
  }
  return table;
}

}  // namespace qsteer
