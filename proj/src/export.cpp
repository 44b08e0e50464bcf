#include "csp/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace csp {

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::random_device rd;
  auto tmp = path;
  tmp += ".tmp" + std::to_string(rd());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("failed to write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

void check_size(const Grid& grid, std::span<const double> values) {
  if (values.size() != grid.state_count()) throw std::invalid_argument("value map does not match grid size");
}

}  // namespace

std::string encode_pgm16(const Grid& grid, std::span<const double> values) {
  check_size(grid, values);
  std::string out = "P5\n" + std::to_string(grid.width) + " " + std::to_string(grid.height) + "\n65535\n";
  for (double v : values) {
    const double clamped = std::clamp(std::isfinite(v) ? v : 0.0, 0.0, 1.0);
    const auto sample = static_cast<std::uint16_t>(std::lround(clamped * 65535.0));
    out.push_back(static_cast<char>(sample >> 8));
    out.push_back(static_cast<char>(sample & 0xFF));
  }
  return out;
}

std::string encode_grid_csv(const Grid& grid, std::span<const double> values) {
  check_size(grid, values);
  std::string out;
  char buf[32];
  for (int r = 0; r < grid.height; ++r) {
    for (int c = 0; c < grid.width; ++c) {
      if (c) out += ',';
      std::snprintf(buf, sizeof buf, "%.17g", values[grid.index(r, c)]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::string trajectory_svg(const Grid& grid, const EnvironmentSchedule& schedule, const GoalSet& goals,
                           const Episode& episode) {
  constexpr int kCell = 24;
  const int w = grid.width * kCell;
  const int h = grid.height * kCell;
  auto cx = [&](StateIndex s) { return grid.col_of(s) * kCell + kCell / 2; };
  auto cy = [&](StateIndex s) { return grid.row_of(s) * kCell + kCell / 2; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 "
      << w << ' ' << h << "\">\n";
  svg << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\" stroke=\"black\"/>\n";
  for (int r = 1; r < grid.height; ++r) {
    svg << "<line x1=\"0\" y1=\"" << r * kCell << "\" x2=\"" << w << "\" y2=\"" << r * kCell
        << "\" stroke=\"#ddd\"/>\n";
  }
  for (int c = 1; c < grid.width; ++c) {
    svg << "<line x1=\"" << c * kCell << "\" y1=\"0\" x2=\"" << c * kCell << "\" y2=\"" << h
        << "\" stroke=\"#ddd\"/>\n";
  }
  if (schedule.count() > 0) {
    for (StateIndex s : schedule.obstacles[0]) {
      svg << "<rect x=\"" << grid.col_of(s) * kCell << "\" y=\"" << grid.row_of(s) * kCell << "\" width=\"" << kCell
          << "\" height=\"" << kCell << "\" fill=\"#444\"/>\n";
    }
  }
  for (const Goal& g : goals.goals) {
    svg << "<rect x=\"" << grid.col_of(g.state) * kCell + 2 << "\" y=\"" << grid.row_of(g.state) * kCell + 2
        << "\" width=\"" << kCell - 4 << "\" height=\"" << kCell - 4
        << "\" fill=\"none\" stroke=\"#2a7\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << cx(g.state) << "\" y=\"" << cy(g.state) + 4
        << "\" font-size=\"9\" text-anchor=\"middle\" fill=\"#2a7\">" << g.label << "</text>\n";
  }
  if (!episode.trajectory.empty()) {
    svg << "<polyline fill=\"none\" stroke=\"#c33\" stroke-width=\"2\" points=\"";
    for (std::size_t t = 0; t < episode.trajectory.size(); ++t) {
      if (t) svg << ' ';
      svg << cx(episode.trajectory[t]) << ',' << cy(episode.trajectory[t]);
    }
    svg << "\"/>\n";
    svg << "<circle cx=\"" << cx(episode.trajectory.front()) << "\" cy=\"" << cy(episode.trajectory.front())
        << "\" r=\"4\" fill=\"#33c\"/>\n";
  }
  for (const Certificate& cert : episode.certificates) {
    svg << "<circle cx=\"" << cx(cert.state) << "\" cy=\"" << cy(cert.state)
        << "\" r=\"6\" fill=\"none\" stroke=\"#c33\"><title>t=" << cert.time << "</title></circle>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace csp
