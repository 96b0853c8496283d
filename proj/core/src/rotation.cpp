#include "ropf/rotation.hpp"

#include <cmath>
#include <stdexcept>

namespace ropf {

std::array<double, 2> to_polar_admittance(double g, double b) {
    if (g == 0.0 && b == 0.0) throw std::invalid_argument("zero admittance");
    return {std::hypot(g, b), std::atan2(b, g)};
}

std::array<double, 2> rotate_pq(double p, double q, double psi) {
    double c = std::cos(psi), s = std::sin(psi);
    return {c * p + s * q, -s * p + c * q};
}

std::array<double, 2> inverse_rotation(double p_tilde, double q_tilde, double psi) {
    double c = std::cos(psi), s = std::sin(psi);
    return {c * p_tilde - s * q_tilde, s * p_tilde + c * q_tilde};
}

RotationContext rotate_injections(const NetworkCase& net, double psi) {
    RotationContext ctx;
    ctx.psi = psi;
    ctx.cos_psi = std::cos(psi);
    ctx.sin_psi = std::sin(psi);
    ctx.demand.reserve(net.buses.size());
    for (const auto& bus : net.buses)
        ctx.demand.push_back(rotate_pq(bus.p_demand, bus.q_demand, psi));
    return ctx;
}

BranchFlows rectangular_flows(const NetworkCase& net, const OperatingPoint& pt,
                              const Branch& br) {
    int l = net.bus_index(br.from_bus), m = net.bus_index(br.to_bus);
    double vl = pt.v[l], vm = pt.v[m];
    double x = pt.theta[l] - pt.theta[m] - br.shift;
    double cx = std::cos(x), sx = std::sin(x);
    double t2 = br.tau * br.tau;
    double vv = vl * vm / br.tau;
    double bt = br.b + 0.5 * br.b_charge;
    BranchFlows f;
    f.p_lm = br.g * vl * vl / t2 - vv * (br.g * cx + br.b * sx);
    f.q_lm = -bt * vl * vl / t2 - vv * (br.g * sx - br.b * cx);
    f.p_ml = br.g * vm * vm - vv * (br.g * cx - br.b * sx);
    f.q_ml = -bt * vm * vm + vv * (br.g * sx + br.b * cx);
    return f;
}

BranchFlows rotated_flows(const NetworkCase& net, const OperatingPoint& pt,
                          const Branch& br, double psi) {
    int l = net.bus_index(br.from_bus), m = net.bus_index(br.to_bus);
    double vl = pt.v[l], vm = pt.v[m];
    double y = br.admittance_magnitude();
    double delta = br.admittance_angle();
    double dh = delta + psi;
    double theta = pt.theta[l] - pt.theta[m];
    double xs = theta - delta - br.shift - psi; // sending-end trig argument
    double xr = theta + delta - br.shift + psi; // receiving-end trig argument
    double self_p = y * std::cos(dh) - 0.5 * br.b_charge * std::sin(psi);
    double self_q = -y * std::sin(dh) - 0.5 * br.b_charge * std::cos(psi);
    double t2 = br.tau * br.tau;
    double vv = vl * vm * y / br.tau;
    BranchFlows f;
    f.p_lm = self_p * vl * vl / t2 - vv * std::cos(xs);
    f.q_lm = self_q * vl * vl / t2 - vv * std::sin(xs);
    f.p_ml = self_p * vm * vm - vv * std::cos(xr);
    f.q_ml = self_q * vm * vm + vv * std::sin(xr);
    return f;
}

TerminalRelation terminal_relation(const Branch& br, double psi) {
    TerminalRelation rel;
    rel.delta_hat = br.admittance_angle() + psi;
    double c = std::cos(rel.delta_hat), s = std::sin(rel.delta_hat);
    rel.alpha = c * c - s * s;
    rel.beta = 2.0 * c * s;
    return rel;
}

Mat2 parallel_relation(const Branch& a, const Branch& b, double psi) {
    if (a.from_bus != b.from_bus || a.to_bus != b.to_bus)
        throw std::invalid_argument("branches are not parallel");
    double sigma_a = a.admittance_angle() + a.shift + psi;
    double sigma_b = b.admittance_angle() + b.shift + psi;
    double d = sigma_a - sigma_b;
    double c = std::cos(d), s = std::sin(d);
    return {c, s, -s, c};
}

Mat2 m_matrix(const Branch& br, double psi) {
    double phi = br.admittance_angle() + br.shift + psi;
    double c = std::cos(phi), s = std::sin(phi);
    return {-s, c, c, s};
}

} // namespace ropf
