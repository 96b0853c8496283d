// network.hpp - per-unit network data model for AC optimal power flow
#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ropf {

struct Bus {
    int id = 0;
    double v_min = 0.0, v_max = 0.0;     // voltage magnitude bounds, p.u.
    double p_demand = 0.0, q_demand = 0.0;
    double g_shunt = 0.0, b_shunt = 0.0;
};

struct Generator {
    int bus = 0;
    double p_min = 0.0, p_max = 0.0;
    double q_min = 0.0, q_max = 0.0;
    // cost = c2 * P^2 + c1 * P + c0, with P in p.u. (coefficients pre-scaled)
    double c2 = 0.0, c1 = 0.0, c0 = 0.0;
};

struct Branch {
    int from_bus = 0, to_bus = 0;        // l, m
    double g = 0.0, b = 0.0;             // series admittance, p.u.
    double b_charge = 0.0;               // total line charging
    double tau = 1.0;                    // tap ratio (from side)
    double shift = 0.0;                  // phase shift, rad
    std::optional<double> s_rating;      // apparent power limit, p.u.
    double ang_min = 0.0, ang_max = 0.0; // angle difference bounds, rad

    double admittance_magnitude() const { return std::hypot(g, b); }
    double admittance_angle() const { return std::atan2(b, g); }
};

struct NetworkCase {
    std::string name;
    double s_base = 100.0; // MVA
    std::vector<Bus> buses;
    std::vector<Generator> generators;
    std::vector<Branch> branches;
    std::set<int> reference_buses;

    // index of bus with given id, or -1
    int bus_index(int id) const;
    int num_buses() const { return static_cast<int>(buses.size()); }
};

// Violated-invariant diagnostics; empty means valid.
std::vector<std::string> validate_case(const NetworkCase& net);

} // namespace ropf
