#include "ropf/conic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ropf {

int ConicProgram::add_variable(std::string name, double lo, double hi, double cost) {
    int idx = num_vars();
    obj.push_back(cost);
    lb.push_back(lo);
    ub.push_back(hi);
    var_names.push_back(std::move(name));
    return idx;
}

void ConicProgram::add_equality(std::vector<std::pair<int, double>> terms, double rhs) {
    std::sort(terms.begin(), terms.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    SparseRow row;
    row.rhs = rhs;
    for (const auto& [idx, coef] : terms) {
        if (!row.terms.empty() && row.terms.back().first == idx)
            row.terms.back().second += coef;
        else
            row.terms.emplace_back(idx, coef);
    }
    std::erase_if(row.terms, [](const auto& t) { return t.second == 0.0; });
    rows.push_back(std::move(row));
}

void ConicProgram::add_cone(ConeKind kind, std::vector<int> vars) {
    cones.push_back({kind, std::move(vars)});
}

std::vector<std::string> ConicProgram::validate() const {
    std::vector<std::string> out;
    int n = num_vars();
    auto complain = [&](const std::string& msg) { out.push_back(msg); };
    for (int i = 0; i < n; ++i) {
        if (!(lb[i] <= ub[i])) {
            std::ostringstream os;
            os << "variable " << i << " has empty bound interval";
            complain(os.str());
        }
        if (std::isnan(obj[i])) complain("objective has NaN coefficient");
    }
    for (size_t r = 0; r < rows.size(); ++r) {
        int prev = -1;
        for (const auto& [idx, coef] : rows[r].terms) {
            std::ostringstream os;
            if (idx < 0 || idx >= n) {
                os << "row " << r << " references variable " << idx << " out of range";
                complain(os.str());
            } else if (idx <= prev) {
                os << "row " << r << " has unsorted or duplicate columns";
                complain(os.str());
            } else if (!std::isfinite(coef)) {
                os << "row " << r << " has non-finite coefficient";
                complain(os.str());
            }
            prev = idx;
        }
        if (!std::isfinite(rows[r].rhs)) complain("row rhs non-finite");
    }
    std::vector<char> is_head(n, 0);
    for (size_t k = 0; k < cones.size(); ++k) {
        const auto& cone = cones[k];
        if (!cone.vars.empty() && cone.vars[0] >= 0 && cone.vars[0] < n) {
            if (is_head[cone.vars[0]]) {
                std::ostringstream os;
                os << "variable " << cone.vars[0] << " heads more than one cone";
                complain(os.str());
            }
            is_head[cone.vars[0]] = 1;
        }
        size_t min_size = cone.kind == ConeKind::SecondOrder ? 2 : 3;
        std::ostringstream os;
        if (cone.vars.size() < min_size) {
            os << "cone " << k << " too small";
            complain(os.str());
        }
        for (int idx : cone.vars)
            if (idx < 0 || idx >= n) {
                os << "cone " << k << " references variable out of range";
                complain(os.str());
                break;
            }
    }
    return out;
}

} // namespace ropf
