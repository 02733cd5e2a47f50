#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bas_sdre/sim.hpp"

namespace bas_sdre {

/// Column names of the trajectory CSV:
///   t, x1..xn, z1..zq, u1..um, h_min, z_consistency, W, W_dot,
///   min_eig_Q_hat, k_<row>_<col>..., status
std::vector<std::string> trajectory_header(int n, int q, int m);

/// Values use 17 significant digits so they round-trip exactly.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

/// Parses a CSV written by write_trajectory_csv. Gains and certificate columns
/// are restored when present. Throws Error(kDataFormat) on an empty file,
/// a header that does not follow the schema, or malformed rows.
Trajectory read_trajectory_csv(std::istream& in);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

std::string format_double(double v);

}  // namespace bas_sdre
