// matpower.hpp - MATPOWER ".m" case file reading and writing
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ropf/network.hpp"

namespace ropf {

struct CaseFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raw numeric tables mirroring the MATPOWER column layout.
struct RawCase {
    std::string name;
    double base_mva = 0.0;
    std::vector<std::vector<double>> bus_table;
    std::vector<std::vector<double>> gen_table;
    std::vector<std::vector<double>> branch_table;
    std::vector<std::vector<double>> gencost_table;
};

// MATPOWER 0 / |ang| >= 360 deg angle bounds are treated as unbounded and
// clamped to +/- this value (rad).
inline constexpr double kAngleBoundClamp = 1.5707963267948966 - 1e-4;

RawCase parse_raw_case(const std::string& text);
NetworkCase to_network(const RawCase& raw);
NetworkCase parse_case(const std::string& text);
std::string write_case(const NetworkCase& net);

} // namespace ropf
