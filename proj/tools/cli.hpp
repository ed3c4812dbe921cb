#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "thenon/entire_fn.hpp"
#include "thenon/henon.hpp"

namespace thenon::cli {

using json = nlohmann::ordered_json;

// Parses the function grammar: {"kind":"exp"} | {"kind":"sin"} |
// {"kind":"z_exp"} | {"kind":"exp_z2"} | {"kind":"poly","coeffs":[...]} |
// {"kind":"exp_of","g":{poly},"scale":a,"offset":c}.
EntireFunction parse_function(const json& spec);

// number or [re, im]
cplx parse_complex(const json& v, const std::string& where);

json tower_json(const Tower& t);
json complex_json(cplx z);

void write_orbit_csv(std::ostream& os, const OrbitRecord& rec);

// argv without the program name; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace thenon::cli
