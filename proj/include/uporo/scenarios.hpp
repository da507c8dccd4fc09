#pragma once

#include "uporo/config.hpp"
#include "uporo/diagnostics.hpp"
#include "uporo/solver.hpp"

namespace uporo {

/// Named scenario library. Each builder returns a self-contained problem;
/// config blocks override the scenario's material, mesh and solver defaults.

/// Zero data everywhere: the trajectory stays at the zero state.
ProblemSpec make_zero_problem(const RunConfig& c);

/// Constant traction on the top edge with matching initial data: a discrete
/// steady state, every step reproduces the initial state.
ProblemSpec make_steady_problem(const RunConfig& c);

/// Unsaturated redistribution column: dry at the bottom, drained top with a
/// constant surface load. The default test bed for monitors and ladders.
ProblemSpec make_drainage_problem(const RunConfig& c);

TerzaghiSetup make_terzaghi_setup(const RunConfig& c);

MmsCase make_mms_case(const RunConfig& c);

/// Dispatch on c.scenario ("zero", "steady", "drainage", "terzaghi",
/// "mms-saturated", "mms-unsaturated").
ProblemSpec make_problem(const RunConfig& c);

/// Boundary tags from the config's [boundary] section applied over defaults.
BoundaryConditions apply_boundary_overrides(const RunConfig& c,
                                            BoundaryConditions bc);

}  // namespace uporo
