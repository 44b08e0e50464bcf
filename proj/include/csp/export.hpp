#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "csp/sim.hpp"
#include "csp/world.hpp"

namespace csp {

/// Writes via a sibling temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Binary 16-bit PGM (P5, maxval 65535, big-endian samples). Values in [0, 1]
/// map linearly onto 0..65535, one pixel per grid cell.
std::string encode_pgm16(const Grid& grid, std::span<const double> values);

/// height rows of width comma-separated values, %.17g.
std::string encode_grid_csv(const Grid& grid, std::span<const double> values);

/// Episode trajectory drawn over the grid with obstacles of the environment
/// active at t = 0, goals, and certificates.
std::string trajectory_svg(const Grid& grid, const EnvironmentSchedule& schedule, const GoalSet& goals,
                           const Episode& episode);

}  // namespace csp
