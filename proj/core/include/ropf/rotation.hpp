// rotation.hpp - polar admittance flows, complex-base-power rotation,
// terminal / parallel-line relations
#pragma once

#include <array>
#include <vector>

#include "ropf/network.hpp"

namespace ropf {

struct Mat2 {
    // [[a11, a12], [a21, a22]]
    double a11 = 1.0, a12 = 0.0, a21 = 0.0, a22 = 1.0;

    std::array<double, 2> apply(double x1, double x2) const {
        return {a11 * x1 + a12 * x2, a21 * x1 + a22 * x2};
    }
    Mat2 operator*(const Mat2& o) const {
        return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
                a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
    }
    double det() const { return a11 * a22 - a12 * a21; }
};

// (Y, delta) with Y = sqrt(g^2+b^2), delta = atan2(b, g); throws on (0,0).
std::array<double, 2> to_polar_admittance(double g, double b);

// S_rot = S * e^{-j psi}
std::array<double, 2> rotate_pq(double p, double q, double psi);
// exact inverse of rotate_pq
std::array<double, 2> inverse_rotation(double p_tilde, double q_tilde, double psi);

struct RotationContext {
    double psi = 0.0;
    double cos_psi = 1.0, sin_psi = 0.0;
    // per bus (same order as NetworkCase::buses): rotated demand
    std::vector<std::array<double, 2>> demand;
};

RotationContext rotate_injections(const NetworkCase& net, double psi);

struct OperatingPoint {
    std::vector<double> v;      // per bus, p.u.
    std::vector<double> theta;  // per bus, rad
    std::vector<double> p_gen;  // per generator, p.u.
    std::vector<double> q_gen;
};

struct BranchFlows {
    double p_lm = 0.0, q_lm = 0.0, p_ml = 0.0, q_ml = 0.0;
};

// Flows in original coordinates from the rectangular (g, b) branch model,
// generalized with tap ratio and phase shift.
BranchFlows rectangular_flows(const NetworkCase& net, const OperatingPoint& pt,
                              const Branch& br);
// Flows in the rotated base; psi = 0 reduces to rectangular_flows.
BranchFlows rotated_flows(const NetworkCase& net, const OperatingPoint& pt,
                          const Branch& br, double psi);

struct TerminalRelation {
    double alpha = 1.0, beta = 0.0;
    double delta_hat = 0.0; // delta + psi (shift enters the trig arguments)
    Mat2 matrix() const { return {alpha, beta, -beta, alpha}; }
};

// Links sending-end (sin, cos) of theta - delta_hat to receiving-end values
// of theta + delta_hat.
TerminalRelation terminal_relation(const Branch& br, double psi);

// Rotation with angle sigma_a - sigma_b (sigma = delta + shift + psi) mapping
// [sin(theta - sigma_a); cos(theta - sigma_a)] to the branch-b counterpart.
// Throws unless both branches connect the same (l, m) pair.
Mat2 parallel_relation(const Branch& a, const Branch& b, double psi);

// M' with [cos theta; sin theta] = M' * [sin(x_s); cos(x_s)],
// x_s = theta - delta - shift - psi.
Mat2 m_matrix(const Branch& br, double psi);

} // namespace ropf
