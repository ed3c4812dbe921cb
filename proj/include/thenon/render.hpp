#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "thenon/henon.hpp"

namespace thenon {

// p(s, t) = base + s u + t v over [s_min, s_max] x [t_min, t_max]; row 0 is
// the t_max edge.
struct SliceSpec {
    C2 base{};
    C2 u{cplx(1.0, 0.0), cplx(0.0, 0.0)};
    C2 v{cplx(0.0, 1.0), cplx(0.0, 0.0)};
    int width = 64;
    int height = 64;
    double s_min = -2.0, s_max = 6.0;
    double t_min = -4.0, t_max = 4.0;
    int max_iter = 64;
    double log_escape_radius = 2.995732273553991;  // ln 20
};

void validate(const SliceSpec& spec);

// pixel centre to slice point
C2 slice_point(const SliceSpec& spec, int col, int row);

struct EscapeGrid {
    std::vector<int> counts;
    SliceSpec spec;

    int at(int col, int row) const { return counts[static_cast<std::size_t>(row) * spec.width + col]; }
};

// First n <= max_iter with log|z_n| > log_escape_radius, else max_iter.
int escape_count(const HenonMap& map, const C2& p, int max_iter, double log_escape_radius);

EscapeGrid render_slice(const HenonMap& map, const SliceSpec& spec, int threads = 1);

extern const std::array<std::array<std::uint8_t, 3>, 64> kPalette;

std::vector<std::uint8_t> ppm_bytes(const EscapeGrid& grid);
void write_ppm(const EscapeGrid& grid, const std::string& path);

}  // namespace thenon
