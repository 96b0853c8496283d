// relaxation.hpp - assembly of the convex conic relaxations of AC optimal
// power flow in original and rotated per-unit coordinates
#pragma once

#include <map>
#include <string>
#include <vector>

#include "ropf/conic.hpp"
#include "ropf/envelopes.hpp"
#include "ropf/network.hpp"
#include "ropf/rotation.hpp"
#include "ropf/solver.hpp"

namespace ropf {

enum class RelaxationKind { QC, RQC, TRQC };

const char* to_string(RelaxationKind kind);

struct VariableMap {
    std::map<std::string, int> idx;

    int at(const std::string& name) const;
    bool contains(const std::string& name) const { return idx.count(name) != 0; }
};

struct BuildOptions {
    EnvelopeFallback fallback = EnvelopeFallback::None;
};

struct BuiltRelaxation {
    RelaxationKind kind = RelaxationKind::QC;
    double psi = 0.0;
    ConicProgram program;
    VariableMap vars;
    // number of trigonometric lifted variables registered per connected bus
    // pair (diagnostic for the two-per-pair property)
    std::map<std::pair<int, int>, int> trig_lifted_per_pair;
};

BuiltRelaxation build_qc(const NetworkCase& net, const BuildOptions& opts = {});
BuiltRelaxation build_rqc(const NetworkCase& net, double psi, const BuildOptions& opts = {});
BuiltRelaxation build_trqc(const NetworkCase& net, double psi, const BuildOptions& opts = {});

struct RelaxationResult {
    SolveStatus status = SolveStatus::NumericalFailure;
    double bound = 0.0;           // $/hr objective lower bound when Optimal
    std::vector<double> x;        // primal values keyed by BuiltRelaxation::vars
    // original-coordinate generation (inverse-rotated), per generator
    std::vector<double> p_gen, q_gen;
    int iterations = 0;
    double max_kkt_residual = 0.0;
    double solve_time_s = 0.0;
    std::string message;
};

RelaxationResult solve_relaxation(const BuiltRelaxation& relax,
                                  const SolverOptions& opts = {});

struct Dispatch {
    std::vector<double> p, q; // per generator, original coordinates, p.u.
};

// Maps a solved rotated dispatch back to original coordinates; throws on
// non-optimal results.
Dispatch recover_original(const BuiltRelaxation& relax, const RelaxationResult& result);

// Signed equality residuals and positive-part inequality violations of the
// nonconvex model at an operating point; max-norm zero iff feasible.
std::vector<double> ac_residuals(const NetworkCase& net, const OperatingPoint& pt);

// generation cost of an operating point, $/hr
double dispatch_cost(const NetworkCase& net, const OperatingPoint& pt);

// (local - bound) / local; throws on nonpositive local objective
double optimality_gap(double local_objective, double bound);

} // namespace ropf
