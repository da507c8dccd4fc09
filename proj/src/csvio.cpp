#include "uporo/csvio.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace uporo {

namespace {
constexpr const char* kVersion = "0.1.0";

void write_meta(std::ostream& os, const CsvMeta& meta) {
  os << "# version: " << kVersion << "\n";
  for (const auto& [k, v] : meta) os << "# " << k << ": " << v << "\n";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string config_hash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

void write_csv(const std::string& path, const CsvMeta& meta,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_meta(os, meta);
  for (std::size_t i = 0; i < header.size(); ++i)
    os << header[i] << (i + 1 < header.size() ? "," : "\n");
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << row[i] << (i + 1 < row.size() ? "," : "\n");
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

void write_state_checkpoint(const std::string& prefix, const State& state,
                            const TransientSolver& solver,
                            const CsvMeta& extra_meta) {
  const Mesh& mesh = solver.problem().mesh;
  const KirchhoffLaws& laws = solver.laws();
  CsvMeta meta = extra_meta;
  meta.emplace_back("step", std::to_string(state.step));
  meta.emplace_back("time", format_double(state.time));

  std::vector<std::vector<std::string>> cells;
  cells.reserve(mesh.cell_count());
  for (int k = 0; k < mesh.cell_count(); ++k) {
    const auto& c = mesh.cell(k);
    const double chi = state.chi[k];
    cells.push_back({std::to_string(k), format_double(c.center[0]),
                     format_double(c.center[1]), format_double(chi),
                     format_double(laws.p_w(chi)),
                     format_double(laws.saturation(chi)),
                     format_double(laws.pore_pressure(chi))});
  }
  write_csv(prefix + "_cells.csv", meta,
            {"cell", "x", "y", "chi", "p_w", "s_w", "p_pore"}, cells);

  const DisplacementSpace& space = solver.space();
  std::vector<std::vector<std::string>> nodes;
  nodes.reserve(space.node_count());
  for (int n = 0; n < space.node_count(); ++n) {
    nodes.push_back({std::to_string(n), format_double(space.node(n)[0]),
                     format_double(space.node(n)[1]),
                     format_double(state.u[2 * n]),
                     format_double(state.u[2 * n + 1])});
  }
  write_csv(prefix + "_nodes.csv", meta, {"node", "x", "y", "ux", "uy"}, nodes);
}

namespace {

struct ParsedCsv {
  CsvMeta meta;
  std::vector<std::vector<std::string>> rows;  // header excluded
};

ParsedCsv read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  ParsedCsv out;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon != std::string::npos)
        out.meta.emplace_back(line.substr(2, colon - 2),
                              line.substr(colon + 2));
      continue;
    }
    if (!header_seen) {
      header_seen = true;  // skip header row
      continue;
    }
    out.rows.push_back(split_csv_line(line));
  }
  return out;
}

}  // namespace

State read_state_checkpoint(const std::string& prefix,
                            const TransientSolver& solver) {
  const ParsedCsv cells = read_csv(prefix + "_cells.csv");
  const ParsedCsv nodes = read_csv(prefix + "_nodes.csv");
  const Mesh& mesh = solver.problem().mesh;
  const DisplacementSpace& space = solver.space();
  if (int(cells.rows.size()) != mesh.cell_count())
    throw std::runtime_error("checkpoint: cell count mismatch");
  if (int(nodes.rows.size()) != space.node_count())
    throw std::runtime_error("checkpoint: node count mismatch");
  State s;
  s.chi = CellField::Zero(mesh.cell_count());
  for (const auto& row : cells.rows)
    s.chi[std::stoi(row[0])] = std::stod(row[3]);
  s.u = Eigen::VectorXd::Zero(space.dof_count());
  for (const auto& row : nodes.rows) {
    const int n = std::stoi(row[0]);
    s.u[2 * n] = std::stod(row[3]);
    s.u[2 * n + 1] = std::stod(row[4]);
  }
  for (const auto& [k, v] : cells.meta) {
    if (k == "step") s.step = std::stoi(v);
    if (k == "time") s.time = std::stod(v);
  }
  return s;
}

void write_energy_csv(const std::string& path, const EnergyReport& report,
                      double tau, const CsvMeta& extra_meta) {
  CsvMeta meta = extra_meta;
  for (const auto& [name, value] : report.named())
    meta.emplace_back(name, format_double(value));
  meta.emplace_back("data_bound", format_double(report.data_bound));
  meta.emplace_back("implied_constant", format_double(report.implied_constant));
  meta.emplace_back("flagged", report.flagged ? "true" : "false");
  std::vector<std::vector<std::string>> rows;
  for (std::size_t n = 0; n < report.legendre_hat_per_step.size(); ++n)
    rows.push_back({std::to_string(n), format_double(n * tau),
                    format_double(report.legendre_hat_per_step[n]),
                    format_double(report.legendre_bar_per_step[n])});
  write_csv(path, meta, {"step", "t", "legendre_storage_l1", "legendre_ratio_l1"},
            rows);
}

void write_convergence_csv(const std::string& path,
                           const ConvergenceTable& table,
                           const CsvMeta& extra_meta) {
  CsvMeta meta = extra_meta;
  meta.emplace_back("fit_order_chi", format_double(table.fit_order_chi));
  meta.emplace_back("fit_order_u", format_double(table.fit_order_u));
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : table.rows)
    rows.push_back({std::to_string(r.level), format_double(r.h),
                    format_double(r.tau), format_double(r.zeta),
                    format_double(r.eta), format_double(r.err_chi),
                    format_double(r.err_u), format_double(r.order_chi),
                    format_double(r.order_u)});
  write_csv(path, meta,
            {"level", "h", "tau", "zeta", "eta", "err_chi", "err_u",
             "order_chi", "order_u"},
            rows);
}

void write_condition_csv(const std::string& path, const ConditionReport& rep,
                         const CsvMeta& extra_meta) {
  std::vector<std::vector<std::string>> rows{
      {format_double(rep.nd1_bound), format_double(rep.nd2_lower),
       format_double(rep.nd2_upper), format_double(rep.nd3_smin),
       rep.nd3_no_root ? "true" : "false", format_double(rep.a1star_constant),
       format_double(rep.s_floor), format_double(rep.s_range_hi)}};
  write_csv(path, extra_meta,
            {"nd1_bound", "nd2_lower", "nd2_upper", "nd3_smin", "nd3_no_root",
             "a1star_constant", "s_floor", "s_range_hi"},
            rows);
}

void write_smin_table_csv(const std::string& path,
                          const std::vector<SminTableRow>& rows,
                          const CsvMeta& extra_meta) {
  std::vector<std::vector<std::string>> out;
  for (const auto& r : rows)
    out.push_back({format_double(r.alpha_vg), format_double(r.n_vg),
                   format_double(r.k_dr), format_double(r.s_min)});
  write_csv(path, extra_meta, {"alpha_vg", "n_vg", "k_dr", "s_min"}, out);
}

void write_mesh_stats_csv(const std::string& path, const MeshStats& stats,
                          const CsvMeta& extra_meta) {
  std::vector<std::vector<std::string>> rows{
      {std::to_string(stats.nx), std::to_string(stats.ny),
       std::to_string(stats.cells), std::to_string(stats.faces),
       std::to_string(stats.interior_faces),
       std::to_string(stats.boundary_faces),
       format_double(stats.regularity_constant), format_double(stats.tau_min),
       format_double(stats.tau_max), format_double(stats.dual_volume_total),
       format_double(stats.domain_measure)}};
  write_csv(path, extra_meta,
            {"nx", "ny", "cells", "faces", "interior_faces", "boundary_faces",
             "regularity_constant", "tau_min", "tau_max", "dual_volume_total",
             "domain_measure"},
            rows);
}

void write_plot_data(const std::string& path,
                     const std::vector<std::pair<double, double>>& xy,
                     const std::string& comment) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "# " << comment << "\n";
  for (const auto& [x, y] : xy)
    os << format_double(x) << " " << format_double(y) << "\n";
}

}  // namespace uporo
