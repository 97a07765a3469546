#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace berslab::cli {

/// Settings shared by the subcommands. Only the fields a command reads are validated.
struct ExperimentConfig {
    std::string polygon_path;
    std::string t_grid = "0.05:1:0.05";
    std::vector<std::string> conventions;
    std::size_t grunsky_n = 32;
    std::size_t grunsky_m = 512;
    std::size_t theta_l = 5;
    std::string out_dir;
    std::uint64_t seed = 1;
};

/// "a:b:step" (or a single value) expanded to a_k = a + k * step, k = 0, 1, ..., with the
/// last point snapped onto b when it lands within 1e-9 step of it. Throws ValidationError
/// "t_grid" for malformed text, "empty_grid" when no point qualifies, and "t_range" unless
/// every point lies in (0, 1].
std::vector<double> parse_t_grid(const std::string& spec);

/// Runs the command line. Returns 0 on success, 2 for invalid input or usage errors and 1
/// for numerical failures (ray-probe: 1 when no row succeeded).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace berslab::cli
