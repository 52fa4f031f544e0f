#ifndef CCTSENS_SCENARIO_FILE_HPP
#define CCTSENS_SCENARIO_FILE_HPP

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cctsens/multimachine.hpp"
#include "cctsens/smib.hpp"

namespace cctsens {

// Scenario files are INI-style text, one scenario per file:
//
//   name = smib
//   type = smib            # or multimachine
//   t_max = 10
//
//   [pre]                  # per-topology sections
//   ev_over_x = 1.0
//   damping = 0.5
//   ...
//   [constraints]
//   ...
//   [parameters]           # the sensitivity parameter vector p, in order
//   Pm = 0.6
//   ...
//
// '#' starts a comment; values may be whitespace-separated lists (matrix
// rows are given row-major in a single list).

namespace detail {

struct IniDoc {
  // section -> key -> raw value; top-level keys live under "".
  std::map<std::string, std::map<std::string, std::string>> sections;

  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }

  static IniDoc parse(std::istream& in) {
    IniDoc doc;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ParseError("unterminated section header at line " + std::to_string(lineno));
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ParseError("expected 'key = value' at line " + std::to_string(lineno));
      doc.sections[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return doc;
  }

  bool has(const std::string& section, const std::string& key) const {
    const auto s = sections.find(section);
    return s != sections.end() && s->second.count(key) > 0;
  }

  std::string get(const std::string& section, const std::string& key) const {
    const auto s = sections.find(section);
    if (s == sections.end() || !s->second.count(key))
      throw ParseError("missing key '" + key + "' in section [" + section + "]");
    return s->second.at(key);
  }

  double get_num(const std::string& section, const std::string& key) const {
    const std::string raw = get(section, key);
    try {
      size_t pos = 0;
      const double v = std::stod(raw, &pos);
      if (trim(raw.substr(pos)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw ParseError("value of '" + key + "' in [" + section + "] is not a number");
  }

  double get_num_or(const std::string& section, const std::string& key, double dflt) const {
    return has(section, key) ? get_num(section, key) : dflt;
  }

  std::vector<double> get_list(const std::string& section, const std::string& key) const {
    std::istringstream ss(get(section, key));
    std::vector<double> out;
    double v;
    while (ss >> v) out.push_back(v);
    if (!ss.eof())
      throw ParseError("value of '" + key + "' in [" + section + "] is not a number list");
    return out;
  }
};

inline Scenario scenario_from_ini(const IniDoc& doc) {
  const std::string type = doc.get("", "type");
  if (type == "smib") {
    SmibParams sp;
    sp.Pm = doc.get_num("parameters", "Pm");
    sp.M = doc.get_num("parameters", "M");
    sp.delta_max = doc.get_num("parameters", "delta_max");
    sp.omega_max = doc.get_num("parameters", "omega_max");
    sp.D = doc.get_num_or("pre", "damping", 0.5);
    sp.evx_pre = doc.get_num_or("pre", "ev_over_x", 1.0);
    sp.evx_fault = doc.get_num_or("fault", "ev_over_x", 0.0);
    sp.evx_post = doc.get_num_or("post", "ev_over_x", 1.0);
    sp.t_max = doc.get_num_or("", "t_max", 10.0);
    Scenario sc = smib_model(sp);
    if (doc.has("", "name")) sc.name = doc.get("", "name");
    return sc;
  }
  if (type == "multimachine") {
    MachineDataset ds;
    ds.m = static_cast<int>(doc.get_num("", "machines"));
    auto to_vec = [&](const std::string& sec, const std::string& key) {
      const auto v = doc.get_list(sec, key);
      return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())).eval();
    };
    auto to_mat = [&](const std::string& sec, const std::string& key) {
      const auto v = doc.get_list(sec, key);
      if (static_cast<int>(v.size()) != ds.m * ds.m)
        throw ParseError("'" + key + "' in [" + sec + "] must hold " +
                         std::to_string(ds.m * ds.m) + " row-major entries");
      Mat A(ds.m, ds.m);
      for (int i = 0; i < ds.m; ++i)
        for (int j = 0; j < ds.m; ++j) A(i, j) = v[i * ds.m + j];
      return A;
    };
    ds.M = to_vec("machines", "M");
    ds.E = to_vec("machines", "E");
    ds.d_over_m = doc.get_num_or("machines", "d_over_m", 4.0);
    if (doc.has("machines", "delta_guess")) ds.delta_guess = to_vec("machines", "delta_guess");
    ds.Pm.resize(ds.m);
    for (int i = 0; i < ds.m; ++i)
      ds.Pm[i] = doc.get_num("parameters", "Pm" + std::to_string(i + 1));
    ds.G_pre = to_mat("pre", "g");
    ds.B_pre = to_mat("pre", "b");
    ds.G_fault = to_mat("fault", "g");
    ds.B_fault = to_mat("fault", "b");
    ds.G_post = to_mat("post", "g");
    ds.B_post = to_mat("post", "b");
    const auto pair = doc.get_list("constraints", "pair");
    if (pair.size() != 2) throw ParseError("'pair' in [constraints] must name two machines");
    ds.pair_a = static_cast<int>(pair[0]) - 1;
    ds.pair_b = static_cast<int>(pair[1]) - 1;
    ds.angle_limit = doc.get_num_or("constraints", "limit", std::numbers::pi / 2);
    ds.t_max = doc.get_num_or("", "t_max", 20.0);
    Scenario sc = multimachine_model(ds);
    if (doc.has("", "name")) sc.name = doc.get("", "name");
    return sc;
  }
  throw ParseError("unknown scenario type '" + type + "'");
}

}  // namespace detail

inline Scenario load_scenario(std::istream& in) {
  return detail::scenario_from_ini(detail::IniDoc::parse(in));
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("scenario not found: " + path);
  return load_scenario(in);
}

}  // namespace cctsens

#endif  // CCTSENS_SCENARIO_FILE_HPP
