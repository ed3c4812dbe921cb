#include "thenon/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <thread>

#include "thenon/errors.hpp"

namespace thenon {

// Hue wheel, HSV(i/64, 0.85, 1) rounded to bytes.
const std::array<std::array<std::uint8_t, 3>, 64> kPalette = {{
    {255, 38, 38}, {255, 59, 38}, {255, 79, 38}, {255, 99, 38},
    {255, 120, 38}, {255, 140, 38}, {255, 160, 38}, {255, 180, 38},
    {255, 201, 38}, {255, 221, 38}, {255, 241, 38}, {248, 255, 38},
    {228, 255, 38}, {208, 255, 38}, {187, 255, 38}, {167, 255, 38},
    {147, 255, 38}, {126, 255, 38}, {106, 255, 38}, {86, 255, 38},
    {65, 255, 38}, {45, 255, 38}, {38, 255, 52}, {38, 255, 72},
    {38, 255, 92}, {38, 255, 113}, {38, 255, 133}, {38, 255, 153},
    {38, 255, 174}, {38, 255, 194}, {38, 255, 214}, {38, 255, 235},
    {38, 255, 255}, {38, 235, 255}, {38, 214, 255}, {38, 194, 255},
    {38, 174, 255}, {38, 153, 255}, {38, 133, 255}, {38, 113, 255},
    {38, 92, 255}, {38, 72, 255}, {38, 52, 255}, {45, 38, 255},
    {65, 38, 255}, {86, 38, 255}, {106, 38, 255}, {126, 38, 255},
    {147, 38, 255}, {167, 38, 255}, {187, 38, 255}, {208, 38, 255},
    {228, 38, 255}, {248, 38, 255}, {255, 38, 241}, {255, 38, 221},
    {255, 38, 201}, {255, 38, 180}, {255, 38, 160}, {255, 38, 140},
    {255, 38, 120}, {255, 38, 99}, {255, 38, 79}, {255, 38, 59},
}};

void validate(const SliceSpec& spec) {
    auto fail = [](const std::string& m) { throw Error(ErrorKind::ValidationError, "slice: " + m); };
    if (spec.width < 1 || spec.width > 16384 || spec.height < 1 || spec.height > 16384)
        fail("width and height must lie in [1, 16384]");
    if (norm(spec.u) == 0.0 || norm(spec.v) == 0.0) fail("directions must be nonzero");
    if (!(spec.s_min < spec.s_max) || !(spec.t_min < spec.t_max)) fail("empty window");
    if (!std::isfinite(spec.s_min + spec.s_max + spec.t_min + spec.t_max)) fail("window must be finite");
    if (spec.max_iter < 0) fail("max_iter must be >= 0");
    if (!std::isfinite(spec.log_escape_radius)) fail("log_escape_radius must be finite");
}

C2 slice_point(const SliceSpec& spec, int col, int row) {
    const double s = spec.s_min + (col + 0.5) * (spec.s_max - spec.s_min) / spec.width;
    const double t = spec.t_max - (row + 0.5) * (spec.t_max - spec.t_min) / spec.height;
    return {spec.base[0] + s * spec.u[0] + t * spec.v[0], spec.base[1] + s * spec.u[1] + t * spec.v[1]};
}

int escape_count(const HenonMap& map, const C2& p, int max_iter, double log_escape_radius) {
    // Native arithmetic is enough while |z| <= e^R stays well inside double
    // range; an overflow counts as escaping at that step.
    if (log_escape_radius < 600.0) {
        // |z|^2 against e^{2R} while that fits, |z| against e^R beyond
        const bool squared = log_escape_radius < 300.0;
        const double bound = squared ? std::exp(2.0 * log_escape_radius) : std::exp(log_escape_radius);
        C2 q = p;
        for (int n = 0; n < max_iter; ++n) {
            const double a = squared ? std::norm(q[0]) : std::abs(q[0]);
            if (!(a <= bound)) return n;
            try {
                q = forward(map, q);
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::MagnitudeOverflow) return n + 1;
                throw;
            }
        }
        return max_iter;
    }
    Point2 q = Point2::from_cartesian(p);
    for (int n = 0; n < max_iter; ++n) {
        if (q.z.log_abs() > log_escape_radius) return n;
        try {
            q = forward(map, q);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::MagnitudeOverflow) return n + 1;
            throw;
        }
    }
    return max_iter;
}

EscapeGrid render_slice(const HenonMap& map, const SliceSpec& spec, int threads) {
    validate(spec);
    EscapeGrid g;
    g.spec = spec;
    g.counts.assign(static_cast<std::size_t>(spec.width) * spec.height, 0);
    auto rows = [&](int r0, int r1) {
        for (int row = r0; row < r1; ++row)
            for (int col = 0; col < spec.width; ++col)
                g.counts[static_cast<std::size_t>(row) * spec.width + col] =
                    escape_count(map, slice_point(spec, col, row), spec.max_iter, spec.log_escape_radius);
    };
    const int workers = std::clamp(threads, 1, spec.height);
    if (workers == 1) {
        rows(0, spec.height);
        return g;
    }
    // contiguous row blocks, each written by exactly one worker
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        const int r0 = static_cast<int>(static_cast<long>(spec.height) * w / workers);
        const int r1 = static_cast<int>(static_cast<long>(spec.height) * (w + 1) / workers);
        pool.emplace_back(rows, r0, r1);
    }
    for (auto& t : pool) t.join();
    return g;
}

std::vector<std::uint8_t> ppm_bytes(const EscapeGrid& grid) {
    const std::string header = "P6\n" + std::to_string(grid.spec.width) + " " + std::to_string(grid.spec.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + grid.counts.size() * 3);
    for (int c : grid.counts) {
        if (c >= grid.spec.max_iter) {
            out.insert(out.end(), {0, 0, 0});
        } else {
            const auto& rgb = kPalette[c % 64];
            out.insert(out.end(), rgb.begin(), rgb.end());
        }
    }
    return out;
}

void write_ppm(const EscapeGrid& grid, const std::string& path) {
    const std::vector<std::uint8_t> bytes = ppm_bytes(grid);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorKind::IoError, "write_ppm: cannot open " + path);
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw Error(ErrorKind::IoError, "write_ppm: write failed for " + path);
}

}  // namespace thenon
