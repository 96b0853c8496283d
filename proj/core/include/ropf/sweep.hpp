// sweep.hpp - base-power-angle sweeps and gap-table assembly over a set of
// cases with externally supplied local objectives
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ropf/relaxation.hpp"

namespace ropf {

struct SweepOptions {
    RelaxationKind kind = RelaxationKind::RQC;
    double lo_deg = -90.0;
    double hi_deg = 90.0;
    double step_deg = 0.5;
    int jobs = 1;
    SolverOptions solver;
    BuildOptions build;
};

struct SweepResult {
    std::string case_name;
    std::vector<double> psi_deg;        // strictly increasing grid
    std::vector<double> bound;          // NaN on failed grid points
    std::vector<double> gap;            // fraction, NaN on failure
    std::vector<double> normalized_gap; // gap / max finite gap, in [0, 1]
    double psi_star_deg = 0.0;          // argmin over finite gaps
    double min_gap = 0.0;
};

SweepResult run_sweep(const NetworkCase& net, double local_objective,
                      const SweepOptions& opts);

struct ManifestEntry {
    std::string case_path;
    std::string case_name;
    double local_objective = 0.0;
    std::string local_source;               // provenance of the objective
    std::optional<double> psi_star_deg;     // enables the psi* columns
};

struct GapTableRow {
    std::string case_name;
    double local_objective = 0.0;
    std::string local_source;
    // gaps as fractions; NaN marks a failed solve
    double gap_qc = 0.0;
    double gap_rqc0 = 0.0;
    double gap_rqc80 = 0.0;
    double gap_trqc80 = 0.0;
    std::optional<double> psi_star_deg;
    double gap_rqc_star = 0.0;
    double gap_trqc_star = 0.0;
    double time_qc_s = 0.0, time_rqc80_s = 0.0, time_trqc80_s = 0.0;
};

struct TableOptions {
    int jobs = 1;
    SolverOptions solver;
    BuildOptions build;
};

GapTableRow run_table_row(const NetworkCase& net, const ManifestEntry& entry,
                          const TableOptions& opts);

} // namespace ropf
