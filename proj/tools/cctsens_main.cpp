// Batch front end: scenario loading plus the cct / sens / sweep / csr /
// trace commands, emitting CSV and JSON for external plotting.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "cctsens/cctsens.hpp"

namespace {

using cctsens::Vec;
using json = nlohmann::ordered_json;

// All numeric output is clamped to 12 significant digits so regression
// fixtures stay stable across platforms.
double round12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::strtod(buf, nullptr);
}

json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(round12(v[i]));
  return arr;
}

struct CommonArgs {
  std::string scenario_path;
  std::vector<std::string> overrides;
  std::string out_path;
  double step = 1e-3;
  double tmax = -1.0;
  bool verify = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_verify = false) {
  cmd->add_option("--scenario", args.scenario_path, "scenario file")->required();
  cmd->add_option("--set", args.overrides, "parameter override name=value (repeatable)");
  cmd->add_option("--out", args.out_path, "output file path");
  cmd->add_option("--step", args.step, "integration step (s)");
  cmd->add_option("--tmax", args.tmax, "post-fault horizon (s)");
  if (with_verify)
    cmd->add_flag("--verify", args.verify, "run the finite-difference oracle alongside");
}

Vec apply_overrides(const cctsens::Scenario& sc, const std::vector<std::string>& sets) {
  Vec p = sc.p0;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw cctsens::ParseError("--set expects name=value, got '" + s + "'");
    p[sc.param_index(s.substr(0, eq))] = std::stod(s.substr(eq + 1));
  }
  return p;
}

cctsens::CctOptions make_options(const CommonArgs& args) {
  cctsens::CctOptions opts;
  opts.step = args.step;
  opts.t_max = args.tmax;
  return opts;
}

void write_output(const CommonArgs& args, const std::string& content) {
  if (args.out_path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(args.out_path);
  if (!out) throw cctsens::ParseError("cannot open output file: " + args.out_path);
  out << content;
}

json critical_result_json(const cctsens::CriticalResult& res) {
  json rec;
  rec["t_cr"] = round12(res.t_cr);
  rec["t_stable"] = round12(res.t_stable);
  rec["t_unstable"] = round12(res.t_unstable);
  rec["category"] = res.category;
  rec["x_cr"] = vec_to_json(res.x_cr);
  rec["T"] = res.T ? json(round12(*res.T)) : json(nullptr);
  rec["x_T"] = res.x_T ? vec_to_json(*res.x_T) : json(nullptr);
  if (res.cuep) {
    json cu;
    cu["x"] = vec_to_json(res.cuep->x);
    cu["type"] = res.cuep->uep_type;
    rec["cuep"] = cu;
  } else {
    rec["cuep"] = nullptr;
  }
  rec["iterations"] = res.iterations;
  if (res.tie_ambiguous) rec["tie_ambiguous"] = true;
  return rec;
}

int cmd_cct(const CommonArgs& args) {
  const auto sc = cctsens::load_scenario_file(args.scenario_path);
  const Vec p = apply_overrides(sc, args.overrides);
  const auto res = cctsens::find_cct(sc, p, make_options(args));
  write_output(args, critical_result_json(res).dump(2) + "\n");
  return 0;
}

int cmd_sens(const CommonArgs& args) {
  const auto sc = cctsens::load_scenario_file(args.scenario_path);
  const Vec p = apply_overrides(sc, args.overrides);
  cctsens::CctOptions opts = make_options(args);
  const auto res = cctsens::find_cct(sc, p, opts);
  const auto report = cctsens::compute_sensitivities(sc, p, res, opts);
  json arr = json::array();
  for (size_t k = 0; k < report.entries.size(); ++k) {
    const auto& e = report.entries[k];
    json rec;
    rec["param"] = e.param;
    rec["category"] = e.category;
    if (e.error) {
      rec["error"] = *e.error;
      rec["denominator"] = round12(e.denominator);
    } else {
      rec["dtcr_dp"] = round12(e.dtcr_dp);
      rec["denominator"] = round12(e.denominator);
      if (args.verify) {
        try {
          const double fd = cctsens::fd_cct_sensitivity(sc, p, static_cast<int>(k),
                                                        cctsens::FdSpec{}, opts);
          rec["oracle_fd"] = round12(fd);
          const double scale = std::max(std::abs(fd), 1e-12);
          rec["rel_err"] = round12(std::abs(e.dtcr_dp - fd) / scale);
        } catch (const cctsens::Error& err) {
          rec["oracle_error"] = err.name();
        }
      }
    }
    arr.push_back(rec);
  }
  write_output(args, arr.dump(2) + "\n");
  return 0;
}

struct SweepArgs {
  CommonArgs common;
  std::string param;
  std::string range;   // lo:step:hi
  std::string values;  // comma separated
};

std::vector<double> sweep_values(const SweepArgs& args) {
  std::vector<double> vals;
  if (!args.values.empty()) {
    std::stringstream ss(args.values);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
  } else if (!args.range.empty()) {
    double lo, step, hi;
    char c1, c2;
    std::stringstream ss(args.range);
    if (!(ss >> lo >> c1 >> step >> c2 >> hi) || c1 != ':' || c2 != ':' || step <= 0)
      throw cctsens::ParseError("--range expects lo:step:hi with positive step");
    for (double v = lo; v <= hi + 1e-12; v += step) vals.push_back(v);
  }
  for (size_t i = 1; i < vals.size(); ++i)
    if (vals[i] <= vals[i - 1])
      throw cctsens::ParseError("sweep values must be strictly increasing");
  return vals;
}

int cmd_sweep(const SweepArgs& args) {
  const auto sc = cctsens::load_scenario_file(args.common.scenario_path);
  const Vec p_base = apply_overrides(sc, args.common.overrides);
  const int idx = sc.param_index(args.param);
  const auto vals = sweep_values(args);
  cctsens::CctOptions opts = make_options(args.common);

  std::ostringstream csv;
  csv << "param_value,t_cr,category,dtcr_dp_formula";
  if (args.common.verify) csv << ",dtcr_dp_oracle";
  csv << ",status\n";
  csv.precision(12);
  for (const double v : vals) {
    Vec p = p_base;
    p[idx] = v;
    csv << v << ",";
    try {
      const auto res = cctsens::find_cct(sc, p, opts);
      const auto g = cctsens::compute_ingredients(sc, p, res, idx, opts);
      const double formula = cctsens::dispatch_sensitivity(g);
      csv << res.t_cr << "," << res.category << "," << formula;
      if (args.common.verify) {
        csv << ",";
        try {
          csv << cctsens::fd_cct_sensitivity(sc, p, idx, cctsens::FdSpec{}, opts);
        } catch (const cctsens::Error&) {
        }
      }
      csv << ",ok\n";
    } catch (const cctsens::Error& err) {
      csv << ",,";
      if (args.common.verify) csv << ",";
      csv << "," << err.name() << "\n";
    }
  }
  write_output(args.common, csv.str());
  return 0;
}

struct CsrArgs {
  CommonArgs common;
  std::string window;  // xlo:xhi:ylo:yhi
  int nx = 201, ny = 201;
};

int cmd_csr(const CsrArgs& args) {
  const auto sc = cctsens::load_scenario_file(args.common.scenario_path);
  const Vec p = apply_overrides(sc, args.common.overrides);
  cctsens::CsrGridSpec spec;
  spec.nx = args.nx;
  spec.ny = args.ny;
  spec.step = args.common.step;
  spec.t_max = args.common.tmax;
  if (!args.window.empty()) {
    char c1, c2, c3;
    std::stringstream ss(args.window);
    if (!(ss >> spec.x_lo >> c1 >> spec.x_hi >> c2 >> spec.y_lo >> c3 >> spec.y_hi) ||
        c1 != ':' || c2 != ':' || c3 != ':')
      throw cctsens::ParseError("--window expects xlo:xhi:ylo:yhi");
  } else {
    if (sc.post.dim != 2)
      throw cctsens::DimensionUnsupported("--window required for this scenario");
    spec.x_lo = sc.box_lo[0];
    spec.x_hi = sc.box_hi[0];
    spec.y_lo = sc.box_lo[1];
    spec.y_hi = sc.box_hi[1];
  }
  const auto grid = cctsens::map_csr(sc, p, spec);

  std::ostringstream csv;
  csv.precision(12);
  csv << "x,y,label\n";
  const char* names[] = {"inside-CSR", "infeasible-exit", "unstable"};
  for (int iy = 0; iy < spec.ny; ++iy)
    for (int ix = 0; ix < spec.nx; ++ix)
      csv << grid.x_of(ix) << "," << grid.y_of(iy) << ","
          << names[static_cast<int>(grid.label_at(ix, iy))] << "\n";

  json meta;
  meta["sep"] = vec_to_json(grid.sep.x);
  meta["boundary_samples"] = json::array();
  const char* cls_names[] = {"stable", "unstable", "semi-saddle", "bad-set"};
  for (const auto& bs : grid.boundary_samples) {
    json rec;
    rec["point"] = vec_to_json(bs.cls.point);
    rec["class"] = cls_names[static_cast<int>(bs.cls.cls)];
    rec["Hdot"] = round12(bs.cls.Hdot);
    rec["constraint"] = bs.constraint_index;
    meta["boundary_samples"].push_back(rec);
  }
  meta["semi_saddles"] = json::array();
  for (const auto& s : grid.semi_saddles) meta["semi_saddles"].push_back(vec_to_json(s));
  meta["ueps_in_feasible_region"] = json::array();
  for (const auto& eq : grid.ueps_in_feasible_region) {
    json rec;
    rec["x"] = vec_to_json(eq.x);
    rec["type"] = eq.uep_type;
    meta["ueps_in_feasible_region"].push_back(rec);
  }

  if (args.common.out_path.empty()) {
    std::cout << csv.str() << meta.dump(2) << "\n";
  } else {
    write_output(args.common, csv.str());
    std::string json_path = args.common.out_path;
    const auto dot = json_path.rfind('.');
    json_path = (dot == std::string::npos ? json_path : json_path.substr(0, dot)) + ".json";
    std::ofstream out(json_path);
    if (!out) throw cctsens::ParseError("cannot open output file: " + json_path);
    out << meta.dump(2) << "\n";
  }
  return 0;
}

struct TraceArgs {
  CommonArgs common;
  std::string phase = "fault";
  std::string x0;  // comma separated; default: pre-fault SEP
  double duration = 1.0;
};

int cmd_trace(const TraceArgs& args) {
  const auto sc = cctsens::load_scenario_file(args.common.scenario_path);
  const Vec p = apply_overrides(sc, args.common.overrides);
  const cctsens::ParametricModel* model = nullptr;
  const cctsens::ConstraintSet* h = nullptr;
  if (args.phase == "pre") {
    model = &sc.pre;
  } else if (args.phase == "fault") {
    model = &sc.fault;
    h = &sc.h_fault;
  } else if (args.phase == "post") {
    model = &sc.post;
    h = &sc.h_post;
  } else {
    throw cctsens::ParseError("--phase must be pre, fault or post");
  }

  Vec x0;
  if (args.x0.empty()) {
    x0 = cctsens::find_equilibrium(sc.pre, p, sc.x_guess).x;
  } else {
    std::vector<double> vals;
    std::stringstream ss(args.x0);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    if (static_cast<int>(vals.size()) != model->dim)
      throw cctsens::DimensionMismatch("--x0 length does not match the state dimension");
    x0 = Eigen::Map<const Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  }

  cctsens::IntegrateOptions io;
  io.step = args.common.step;
  io.with_sens = true;
  const auto traj = cctsens::integrate(*model, h, x0, p, args.duration, io);

  std::ostringstream csv;
  csv.precision(12);
  csv << "t";
  for (int i = 0; i < model->dim; ++i) csv << ",x_" << (i + 1);
  csv << ",H";
  for (int i = 0; i < model->dim; ++i)
    for (int j = 0; j < model->dim; ++j) csv << ",phi_x_" << (i + 1) << (j + 1);
  for (int i = 0; i < model->dim; ++i)
    for (int j = 0; j < model->n_params; ++j) csv << ",phi_p_" << (i + 1) << (j + 1);
  csv << "\n";
  for (size_t k = 0; k < traj.times.size(); ++k) {
    csv << traj.times[k];
    for (int i = 0; i < model->dim; ++i) csv << "," << traj.states[k][i];
    csv << "," << (h ? h->H(traj.states[k], p) : 1.0);
    for (int i = 0; i < model->dim; ++i)
      for (int j = 0; j < model->dim; ++j) csv << "," << traj.phi_x[k](i, j);
    for (int i = 0; i < model->dim; ++i)
      for (int j = 0; j < model->n_params; ++j) csv << "," << traj.phi_p[k](i, j);
    csv << "\n";
  }
  write_output(args.common, csv.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"critical clearing time and sensitivity analysis for constrained systems"};
  app.require_subcommand(1);

  CommonArgs cct_args, sens_args;
  SweepArgs sweep_args;
  CsrArgs csr_args;
  TraceArgs trace_args;

  auto* cct = app.add_subcommand("cct", "compute the CCT and failure category");
  add_common(cct, cct_args);
  auto* sens = app.add_subcommand("sens", "CCT sensitivities for every parameter");
  add_common(sens, sens_args, true);
  auto* sweep = app.add_subcommand("sweep", "CCT and sensitivity over a parameter sweep");
  add_common(sweep, sweep_args.common, true);
  sweep->add_option("--param", sweep_args.param, "parameter to sweep")->required();
  sweep->add_option("--range", sweep_args.range, "lo:step:hi");
  sweep->add_option("--values", sweep_args.values, "comma-separated values");
  auto* csr = app.add_subcommand("csr", "map the constrained stability region (2-D)");
  add_common(csr, csr_args.common);
  csr->add_option("--window", csr_args.window, "xlo:xhi:ylo:yhi");
  csr->add_option("--nx", csr_args.nx, "grid resolution in x");
  csr->add_option("--ny", csr_args.ny, "grid resolution in y");
  auto* trace = app.add_subcommand("trace", "dump a trajectory with sensitivities");
  add_common(trace, trace_args.common);
  trace->add_option("--phase", trace_args.phase, "pre, fault or post");
  trace->add_option("--x0", trace_args.x0, "initial state, comma separated");
  trace->add_option("--duration", trace_args.duration, "trace length (s)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cct->parsed()) return cmd_cct(cct_args);
    if (sens->parsed()) return cmd_sens(sens_args);
    if (sweep->parsed()) return cmd_sweep(sweep_args);
    if (csr->parsed()) return cmd_csr(csr_args);
    if (trace->parsed()) return cmd_trace(trace_args);
  } catch (const cctsens::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const cctsens::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
