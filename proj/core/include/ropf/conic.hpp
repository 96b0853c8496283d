// conic.hpp - sparse conic program representation: linear objective, equality
// rows, variable bounds, second-order / rotated second-order cone blocks
#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace ropf {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ConeKind { SecondOrder, RotatedSecondOrder };

// SecondOrder: ||(vars[1..])|| <= vars[0]
// RotatedSecondOrder: ||(vars[2..])||^2 <= 2 * vars[0] * vars[1], both >= 0
struct ConeBlock {
    ConeKind kind = ConeKind::SecondOrder;
    std::vector<int> vars;
};

struct SparseRow {
    std::vector<std::pair<int, double>> terms; // sorted unique column indices
    double rhs = 0.0;
};

struct ConicProgram {
    std::vector<double> obj;       // linear cost per variable
    double obj_constant = 0.0;
    std::vector<double> lb, ub;    // +-kInf when unbounded
    std::vector<std::string> var_names;
    std::vector<SparseRow> rows;   // equality rows A x = b
    std::vector<ConeBlock> cones;

    int num_vars() const { return static_cast<int>(obj.size()); }

    int add_variable(std::string name, double lo = -kInf, double hi = kInf,
                     double cost = 0.0);
    // terms are sorted and duplicates merged
    void add_equality(std::vector<std::pair<int, double>> terms, double rhs);
    void add_cone(ConeKind kind, std::vector<int> vars);

    // empty when well-formed, otherwise human-readable diagnostics
    std::vector<std::string> validate() const;
};

} // namespace ropf
