#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uporo/mesh.hpp"
#include "uporo/solver.hpp"

namespace uporo {

/// Validated run configuration. Pressures and permeabilities are in
/// consistent but unspecified units; lengths and times likewise.
struct RunConfig {
  std::string scenario = "drainage";

  // [mesh]
  int nx = 16, ny = 16;
  double lx = 1.0, ly = 1.0;

  // [time]
  double t_end = 0.1;
  int steps = 16;
  bool t_end_set = false;

  // [material]
  MaterialParams material{1.0e5, 1.0e5, 1.0, 0.0, 0.0, 0.1, 1.0e-2};
  bool material_set = false;  // any [material] key present in the file
  bool load_set = false;

  // [van_genuchten]
  double alpha_vg = 0.5, n_vg = 2.0;

  // [regularization]
  RegularizationParams reg{};

  // [solver]
  SolverOptions solver{};
  bool monitors = false;

  // [boundary] per-side "mech:flow" tags; empty = scenario default
  std::array<std::string, 4> boundary{};

  // [scenario] extras
  double load = 1.0e3;        // traction magnitude where a scenario uses one
  double chi_surface = 0.0;   // initial transformed pressure at the wet end
  double chi_dry = -0.5;      // initial transformed pressure at the dry end

  // [terzaghi]
  int terzaghi_cells = 64;
  int terzaghi_steps = 200;
  int series_terms = 200;

  // [mms]
  std::vector<int> mms_levels{8, 16, 32};
  std::string mms_branch = "saturated";
  double steps_per_cells = 1.0;

  // [sweep]
  std::string sweep_parameter = "eta";
  std::vector<double> ladder{1e-2, 1e-3, 1e-4, 1e-5};

  // [conditions]
  double s_floor = 0.3;
  double declared_smin = 0.0;  // 0 = no declared range to enforce

  // [output]
  std::string output_dir = ".";
  bool plot_data = false;
  unsigned seed = 0;

  std::string raw_text;  // original file contents, hashed into outputs
};

struct ParseResult {
  std::optional<RunConfig> config;
  std::vector<std::string> errors;  // each prefixed with section.key
  bool ok() const { return config.has_value() && errors.empty(); }
};

/// Parse and validate a key = value config with [section] headers and
/// '#' comments. Unknown sections or keys are errors; every violated
/// invariant is reported with its path.
ParseResult parse_config(const std::string& path);
ParseResult parse_config_text(const std::string& text);

}  // namespace uporo
