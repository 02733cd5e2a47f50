#include "bas_sdre/trajectory_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "bas_sdre/error.hpp"

namespace bas_sdre {
namespace {

[[noreturn]] void format_error(const std::string& what) {
  throw Error(ErrorCode::kDataFormat, what);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& s, std::size_t line_no) {
  if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    format_error("line " + std::to_string(line_no) + ": '" + s + "' is not a number");
  }
  return v;
}

int count_prefixed(const std::vector<std::string>& header, char prefix) {
  int count = 0;
  for (const auto& h : header) {
    if (h.size() > 1 && h[0] == prefix &&
        h.find_first_not_of("0123456789", 1) == std::string::npos) {
      ++count;
    }
  }
  return count;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> trajectory_header(int n, int q, int m) {
  std::vector<std::string> h{"t"};
  for (int i = 1; i <= n; ++i) h.push_back("x" + std::to_string(i));
  for (int i = 1; i <= q; ++i) h.push_back("z" + std::to_string(i));
  for (int i = 1; i <= m; ++i) h.push_back("u" + std::to_string(i));
  for (const char* c : {"h_min", "z_consistency", "W", "W_dot", "min_eig_Q_hat"}) {
    h.emplace_back(c);
  }
  for (int r = 1; r <= m; ++r) {
    for (int c = 1; c <= n + q; ++c) {
      h.push_back("k_" + std::to_string(r) + "_" + std::to_string(c));
    }
  }
  h.emplace_back("status");
  return h;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const auto header = trajectory_header(traj.n, traj.q, traj.m);
  for (std::size_t i = 0; i < header.size(); ++i) {
    out << (i ? "," : "") << header[i];
  }
  out << '\n';
  const int nb = traj.n + traj.q;
  for (std::size_t r = 0; r < traj.size(); ++r) {
    out << format_double(traj.t[r]);
    for (int i = 0; i < nb; ++i) out << ',' << format_double(traj.xbar[r](i));
    for (int i = 0; i < traj.m; ++i) out << ',' << format_double(traj.u[r](i));
    out << ',' << format_double(traj.h_min[r]) << ','
        << format_double(traj.z_consistency[r]) << ',' << format_double(traj.W[r])
        << ',' << format_double(traj.W_dot[r]) << ','
        << format_double(traj.min_eig_Q_hat[r]);
    for (int i = 0; i < traj.m; ++i) {
      for (int j = 0; j < nb; ++j) out << ',' << format_double(traj.K[r](i, j));
    }
    const bool last = r + 1 == traj.size();
    out << ',' << to_string(last ? traj.status : RolloutStatus::kRunning) << '\n';
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  write_trajectory_csv(out, traj);
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

Trajectory read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.empty()) format_error("trajectory file is empty");
  if (line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);

  Trajectory traj;
  traj.n = count_prefixed(header, 'x');
  traj.q = count_prefixed(header, 'z');
  traj.m = count_prefixed(header, 'u');
  if (header != trajectory_header(traj.n, traj.q, traj.m)) {
    format_error("trajectory header does not match the schema");
  }
  const int nb = traj.n + traj.q;
  const std::size_t cols = header.size();

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != cols) {
      format_error("line " + std::to_string(line_no) + ": expected " +
                   std::to_string(cols) + " columns");
    }
    std::size_t c = 0;
    traj.t.push_back(parse_cell(cells[c++], line_no));
    VectorXd xbar(nb);
    for (int i = 0; i < nb; ++i) xbar(i) = parse_cell(cells[c++], line_no);
    VectorXd u(traj.m);
    for (int i = 0; i < traj.m; ++i) u(i) = parse_cell(cells[c++], line_no);
    traj.xbar.push_back(std::move(xbar));
    traj.u.push_back(std::move(u));
    traj.h_min.push_back(parse_cell(cells[c++], line_no));
    traj.z_consistency.push_back(parse_cell(cells[c++], line_no));
    traj.W.push_back(parse_cell(cells[c++], line_no));
    traj.W_dot.push_back(parse_cell(cells[c++], line_no));
    traj.min_eig_Q_hat.push_back(parse_cell(cells[c++], line_no));
    traj.xQx_hat.push_back(std::numeric_limits<double>::quiet_NaN());
    MatrixXd K(traj.m, nb);
    for (int i = 0; i < traj.m; ++i) {
      for (int j = 0; j < nb; ++j) K(i, j) = parse_cell(cells[c++], line_no);
    }
    traj.K.push_back(std::move(K));
    const auto status = parse_rollout_status(cells[c]);
    if (!status) format_error("line " + std::to_string(line_no) + ": bad status");
    traj.status = *status;
  }
  if (traj.empty()) format_error("trajectory file has no data rows");
  return traj;
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  return read_trajectory_csv(in);
}

}  // namespace bas_sdre
