#include "ropf/network.hpp"

#include <cmath>
#include <sstream>

namespace ropf {

int NetworkCase::bus_index(int id) const {
    for (size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == id) return static_cast<int>(i);
    return -1;
}

std::vector<std::string> validate_case(const NetworkCase& net) {
    std::vector<std::string> diags;
    auto add = [&](const std::string& s) { diags.push_back(s); };
    std::ostringstream os;

    if (!(net.s_base > 0.0)) add("base MVA must be positive");
    if (net.reference_buses.empty()) add("no reference bus");
    for (int r : net.reference_buses) {
        if (net.bus_index(r) < 0) {
            os.str(""); os << "reference bus " << r << " does not exist";
            add(os.str());
        }
    }
    for (const auto& bus : net.buses) {
        if (!(bus.v_min > 0.0) || !(bus.v_min <= bus.v_max)) {
            os.str(""); os << "bus " << bus.id << ": voltage bounds violate 0 < Vmin <= Vmax";
            add(os.str());
        }
        if (!std::isfinite(bus.g_shunt) || !std::isfinite(bus.b_shunt)) {
            os.str(""); os << "bus " << bus.id << ": non-finite shunt";
            add(os.str());
        }
    }
    for (size_t i = 0; i < net.generators.size(); ++i) {
        const auto& gen = net.generators[i];
        if (net.bus_index(gen.bus) < 0) {
            os.str(""); os << "generator " << i << ": bus " << gen.bus << " does not exist";
            add(os.str());
        }
        if (gen.p_min > gen.p_max) {
            os.str(""); os << "generator " << i << ": p_min > p_max";
            add(os.str());
        }
        if (gen.q_min > gen.q_max) {
            os.str(""); os << "generator " << i << ": q_min > q_max";
            add(os.str());
        }
        if (gen.c2 < 0.0) {
            os.str(""); os << "generator " << i << ": negative quadratic cost";
            add(os.str());
        }
    }
    for (size_t i = 0; i < net.branches.size(); ++i) {
        const auto& br = net.branches[i];
        if (net.bus_index(br.from_bus) < 0 || net.bus_index(br.to_bus) < 0) {
            os.str(""); os << "branch " << i << ": dangling bus reference";
            add(os.str());
        }
        if (!(br.tau > 0.0)) {
            os.str(""); os << "branch " << i << ": tap ratio must be positive";
            add(os.str());
        }
        if (br.ang_min > br.ang_max) {
            os.str(""); os << "branch " << i << ": ang_min > ang_max";
            add(os.str());
        }
        if (br.g == 0.0 && br.b == 0.0) {
            os.str(""); os << "branch " << i << ": zero series admittance";
            add(os.str());
        }
    }
    return diags;
}

} // namespace ropf
