// solver.hpp - homogeneous self-dual interior-point method for programs with
// equality rows, variable bounds, and (rotated) second-order cones
#pragma once

#include <string>
#include <vector>

#include "ropf/conic.hpp"

namespace ropf {

struct SolverOptions {
    double feas_tol = 1e-8;
    double gap_tol = 1e-8;
    int max_iters = 200;
    bool verbose = false;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

const char* to_string(SolveStatus status);

struct SolveReport {
    SolveStatus status = SolveStatus::NumericalFailure;
    double primal_objective = 0.0; // includes the program's constant term
    double dual_objective = 0.0;
    std::vector<double> x; // per program variable (fixed variables filled in)
    std::vector<double> y; // per equality row
    // duals/slacks in the solver's internal inequality ordering (bound rows,
    // then cone blocks); kkt_residuals rebuilds the same ordering
    std::vector<double> z_internal;
    std::vector<double> s_internal;
    int iterations = 0;
    double max_kkt_residual = 0.0;
    double wall_time_s = 0.0;
    std::string message;
};

SolveReport solve(const ConicProgram& prog, const SolverOptions& opts = {});

struct KktResiduals {
    double stationarity = 0.0;   // ||c + A'y + G'z|| (relative)
    double primal_eq = 0.0;      // ||Ax - b||
    double primal_cone = 0.0;    // cone violation of h - Gx
    double dual_cone = 0.0;      // cone violation of z
    double complementarity = 0.0;
    double max_residual = 0.0;
};

// Recomputes residuals from the report's primal/dual values; throws
// std::invalid_argument when duals are missing.
KktResiduals kkt_residuals(const ConicProgram& prog, const SolveReport& report);

} // namespace ropf
