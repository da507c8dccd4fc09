#pragma once

#include <string>
#include <vector>

#include "uporo/conditions.hpp"
#include "uporo/diagnostics.hpp"
#include "uporo/solver.hpp"

namespace uporo {

/// Metadata emitted as a comment block at the top of every CSV: lines of the
/// form "# key: value". No timestamps, so identical inputs give identical
/// bytes.
using CsvMeta = std::vector<std::pair<std::string, std::string>>;

std::string format_double(double v);  // shortest round-trip decimal

/// FNV-1a hash of a config text, reported in output metadata.
std::string config_hash(const std::string& text);

void write_csv(const std::string& path, const CsvMeta& meta,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// State checkpoint: "<prefix>_cells.csv" with per-cell fields
/// (chi, water pressure, saturation, pore pressure) and
/// "<prefix>_nodes.csv" with nodal displacements. Step and time go in the
/// metadata block.
void write_state_checkpoint(const std::string& prefix, const State& state,
                            const TransientSolver& solver,
                            const CsvMeta& extra_meta = {});

/// Restart: reads the pair written by write_state_checkpoint. Validates that
/// counts match the problem discretization.
State read_state_checkpoint(const std::string& prefix,
                            const TransientSolver& solver);

void write_energy_csv(const std::string& path, const EnergyReport& report,
                      double tau, const CsvMeta& extra_meta = {});

void write_convergence_csv(const std::string& path,
                           const ConvergenceTable& table,
                           const CsvMeta& extra_meta = {});

void write_condition_csv(const std::string& path, const ConditionReport& rep,
                         const CsvMeta& extra_meta = {});

void write_smin_table_csv(const std::string& path,
                          const std::vector<SminTableRow>& rows,
                          const CsvMeta& extra_meta = {});

void write_mesh_stats_csv(const std::string& path, const MeshStats& stats,
                          const CsvMeta& extra_meta = {});

/// Two-column gnuplot-friendly data file (x value per line).
void write_plot_data(const std::string& path,
                     const std::vector<std::pair<double, double>>& xy,
                     const std::string& comment);

}  // namespace uporo
