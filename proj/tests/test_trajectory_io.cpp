#include <cmath>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "bas_sdre/error.hpp"
#include "bas_sdre/trajectory_io.hpp"

namespace bas_sdre {
namespace {

Trajectory sample() {
  Trajectory tr;
  tr.n = 2;
  tr.q = 1;
  tr.m = 1;
  tr.status = RolloutStatus::kUnsafe;
  for (int i = 0; i < 3; ++i) {
    tr.t.push_back(0.1 * i);
    tr.xbar.push_back((VectorXd(3) << 1.0 / 3.0 + i, -2e-17 * i, std::exp(1.0 + i)).finished());
    tr.u.push_back(VectorXd::Constant(1, std::sqrt(2.0) * i));
    tr.h_min.push_back(0.75 - 0.3 * i);
    tr.z_consistency.push_back(1e-13 * i);
    tr.W.push_back(i == 1 ? std::numeric_limits<double>::quiet_NaN() : 0.5 * i);
    tr.W_dot.push_back(-0.25 * i);
    tr.min_eig_Q_hat.push_back(0.9);
    tr.xQx_hat.push_back(std::numeric_limits<double>::quiet_NaN());
    tr.K.push_back((MatrixXd(1, 3) << 0.1, 0.2 * i, -1.0 / 7.0).finished());
  }
  return tr;
}

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

TEST(TrajectoryCsv, HeaderFollowsTheSchema) {
  const auto h = trajectory_header(2, 1, 1);
  const std::vector<std::string> expected{"t", "x1", "x2", "z1", "u1", "h_min", "z_consistency",
                                          "W", "W_dot", "min_eig_Q_hat", "k_1_1", "k_1_2",
                                          "k_1_3", "status"};
  EXPECT_EQ(h, expected);
}

TEST(TrajectoryCsv, RoundTripIsExact) {
  const Trajectory tr = sample();
  std::stringstream ss;
  write_trajectory_csv(ss, tr);
  const Trajectory back = read_trajectory_csv(ss);
  ASSERT_EQ(back.size(), tr.size());
  EXPECT_EQ(back.n, 2);
  EXPECT_EQ(back.q, 1);
  EXPECT_EQ(back.m, 1);
  EXPECT_EQ(back.status, RolloutStatus::kUnsafe);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    EXPECT_EQ(back.t[i], tr.t[i]);
    EXPECT_EQ(back.xbar[i], tr.xbar[i]);
    EXPECT_EQ(back.u[i], tr.u[i]);
    EXPECT_EQ(back.h_min[i], tr.h_min[i]);
    EXPECT_EQ(back.z_consistency[i], tr.z_consistency[i]);
    EXPECT_TRUE(same(back.W[i], tr.W[i]));
    EXPECT_TRUE(same(back.W_dot[i], tr.W_dot[i]));
    EXPECT_EQ(back.min_eig_Q_hat[i], tr.min_eig_Q_hat[i]);
    ASSERT_EQ(back.K.size(), tr.K.size());
    EXPECT_EQ(back.K[i], tr.K[i]);
  }
  std::stringstream again;
  write_trajectory_csv(again, back);
  std::stringstream first;
  write_trajectory_csv(first, tr);
  EXPECT_EQ(again.str(), first.str());
}

void expect_data_format(const std::string& text) {
  std::istringstream in(text);
  try {
    read_trajectory_csv(in);
    FAIL() << "accepted: " << text;
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDataFormat);
  }
}

TEST(TrajectoryCsv, MalformedInputIsRejected) {
  expect_data_format("");
  expect_data_format("t,x1,h_min\n");
  expect_data_format("time,x1,u1,h_min,z_consistency,W,W_dot,min_eig_Q_hat,status\n0,1,2,3,4,5,6,7,Converged\n");
  std::stringstream ss;
  write_trajectory_csv(ss, sample());
  expect_data_format(ss.str() + "0.3,1\n");
  std::string bad = ss.str();
  bad.replace(bad.rfind("Unsafe"), 6, "Exploded");
  expect_data_format(bad);
}

TEST(TrajectoryCsv, HeaderOnlyFileIsRejected) {
  std::stringstream ss;
  Trajectory empty;
  empty.n = 2;
  empty.q = 1;
  empty.m = 1;
  write_trajectory_csv(ss, empty);
  expect_data_format(ss.str());
}

}  // namespace
}  // namespace bas_sdre
