// conic_io.hpp - deterministic serialization of conic programs
//
// Text format, version header "CONIC/1":
//   CONIC/1
//   vars <N>
//   rows <M>
//   cones <K>
//   objconst <value>
//   obj <idx>:<value> ...            (nonzero objective entries, ascending idx)
//   name <idx> <text>                (optional, one per named variable)
//   bound <idx> <lo> <hi>            (one per variable with a finite bound;
//                                     lo/hi may be -inf / inf)
//   row <rhs> <idx>:<value> ...      (M equality rows, in order)
//   soc <idx> <idx> ...              (cone blocks, in order; rsoc for rotated)
//   end
// Values are printed with %.17g so a parse round-trip is bit-exact.
#pragma once

#include <stdexcept>
#include <string>

#include "ropf/conic.hpp"

namespace ropf {

struct ConicIoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string export_conic_text(const ConicProgram& prog);
ConicProgram parse_conic_text(const std::string& text);

std::string export_conic_json(const ConicProgram& prog);
ConicProgram parse_conic_json(const std::string& text);

} // namespace ropf
