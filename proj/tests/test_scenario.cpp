#include <string>

#include <gtest/gtest.h>

#include "bas_sdre/error.hpp"
#include "bas_sdre/scenario.hpp"

namespace bas_sdre {
namespace {

const std::string kBase = R"(
[scenario]
name = t
seed = 4
[system]
benchmark = linear2d
[obstacles]
o1 = 2 2 0.5
[cost]
q_diag = 1 1
r_diag = 1
[controller]
kinds = bas_sdre bas_lqr
[integrator]
dt = 1e-3
t_final = 2
[initial_conditions]
a = 4 1.5
)";

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidParams;
}

TEST(Config, ParsesSectionsAndLists) {
  const ScenarioConfig cfg = parse_scenario(kBase);
  EXPECT_EQ(cfg.name, "t");
  EXPECT_EQ(cfg.seed, 4u);
  ASSERT_EQ(cfg.obstacles.size(), 1u);
  EXPECT_EQ(cfg.obstacles[0].radius, 0.5);
  ASSERT_EQ(cfg.controllers.size(), 2u);
  EXPECT_EQ(cfg.controllers[1], ControllerKind::kBasLqr);
  EXPECT_EQ(cfg.dt, 1e-3);
  ASSERT_EQ(cfg.initial_conditions.size(), 1u);
  EXPECT_EQ(cfg.initial_conditions[0], (std::vector<double>{4, 1.5}));
}

TEST(Config, OverridesAreAppliedAndTypeChecked) {
  const ScenarioConfig cfg = parse_scenario(kBase, {"integrator.dt=1e-4", "barrier.gamma=2"});
  EXPECT_EQ(cfg.dt, 1e-4);
  EXPECT_EQ(cfg.gamma, 2.0);
  EXPECT_EQ(code_of([] { parse_scenario(kBase, {"integrator.dt=fast"}); }),
            ErrorCode::kConfigError);
  EXPECT_EQ(code_of([] { parse_scenario(kBase, {"integrator.speed=1"}); }),
            ErrorCode::kConfigError);
  EXPECT_EQ(code_of([] { parse_scenario(kBase, {"no_equals_sign"}); }),
            ErrorCode::kConfigError);
}

TEST(Config, UnknownKeysAndSectionsAreRejected) {
  EXPECT_EQ(code_of([] { parse_scenario(kBase + "[integrator]\nstepper = euler\n"); }),
            ErrorCode::kConfigError);
  EXPECT_EQ(code_of([] { parse_scenario(kBase + "[plotting]\ncolor = red\n"); }),
            ErrorCode::kConfigError);
  EXPECT_EQ(code_of([] { parse_scenario(kBase, {"barrier.kind=quadratic"}); }),
            ErrorCode::kConfigError);
  EXPECT_EQ(code_of([] { parse_scenario(kBase, {"integrator.method=euler"}); }),
            ErrorCode::kConfigError);
}

TEST(Config, MissingFileIsAnIoError) {
  EXPECT_EQ(code_of([] { load_scenario("/nonexistent/dir/x.cfg"); }), ErrorCode::kIoError);
}

TEST(Build, ValidScenario) {
  const Scenario sc = build_scenario(parse_scenario(kBase));
  EXPECT_EQ(sc.model->n_bar(), 3);
  EXPECT_EQ(sc.initial_conditions.size(), 1u);
  EXPECT_EQ(sc.augmented_cost.Q_of_x(VectorXd::Zero(3)), MatrixXd::Identity(3, 3));
}

TEST(Build, ObstacleOverOriginIsRejected) {
  EXPECT_EQ(code_of([] { build_scenario(parse_scenario(kBase, {"obstacles.o2=0.2 0 0.5"})); }),
            ErrorCode::kOriginUnsafe);
}

TEST(Build, InitialConditionChecks) {
  EXPECT_EQ(code_of([] {
              build_scenario(parse_scenario(kBase, {"initial_conditions.b=2 2.1"}));
            }),
            ErrorCode::kConfigError);
  EXPECT_EQ(code_of([] {
              build_scenario(parse_scenario(kBase, {"initial_conditions.b=4 4"}));
            }),
            ErrorCode::kConfigError);
  EXPECT_EQ(code_of([] {
              build_scenario(parse_scenario(kBase, {"initial_conditions.b=4 4 4"}));
            }),
            ErrorCode::kConfigError);
}

TEST(Build, TimeStepChecks) {
  EXPECT_EQ(code_of([] { build_scenario(parse_scenario(kBase, {"integrator.dt=0"})); }),
            ErrorCode::kConfigError);
  EXPECT_EQ(code_of([] { build_scenario(parse_scenario(kBase, {"integrator.t_final=1e-4"})); }),
            ErrorCode::kConfigError);
}

TEST(Build, CostSizesMustMatch) {
  EXPECT_EQ(code_of([] { build_scenario(parse_scenario(kBase, {"cost.q_diag=1 1 1"})); }),
            ErrorCode::kConfigError);
}

TEST(Build, SampledInitialConditionsAreSeededAndSafe) {
  const std::vector<std::string> ov{"initial_conditions.sample_count=6",
                                    "initial_conditions.sample_lo=-1 -1",
                                    "initial_conditions.sample_hi=5 5"};
  const Scenario a = build_scenario(parse_scenario(kBase, ov));
  const Scenario b = build_scenario(parse_scenario(kBase, ov));
  ASSERT_EQ(a.initial_conditions.size(), 7u);
  for (std::size_t i = 0; i < a.initial_conditions.size(); ++i) {
    EXPECT_EQ(a.initial_conditions[i], b.initial_conditions[i]);
    EXPECT_TRUE(chord_is_safe(a.monitor, a.initial_conditions[i]));
  }
  auto ov2 = ov;
  ov2.push_back("scenario.seed=5");
  const Scenario c = build_scenario(parse_scenario(kBase, ov2));
  EXPECT_NE(a.initial_conditions[1], c.initial_conditions[1]);
}

TEST(Build, BarrierDisabledKeepsMonitoring) {
  const Scenario sc = build_scenario(parse_scenario(kBase, {"barrier.enabled=false"}));
  EXPECT_EQ(sc.model->q(), 0);
  EXPECT_EQ(sc.monitor.constraints.size(), 1u);
}

TEST(Build, QuadrotorModes) {
  const std::string quad = R"(
[system]
benchmark = quadrotor
[obstacles]
o1 = 1.0 2.5 0.5
o2 = -1.5 3.0 0.5
o3 = 2.8 1.2 0.5
o4 = -2.6 1.0 0.45
o5 = 0.2 4.2 0.4
[cost]
q_diag = 1 1 1 1 1 1
r_diag = 1 1
[initial_conditions]
a = -0.5 4.8 0 0 0 0
)";
  EXPECT_EQ(build_scenario(parse_scenario(quad)).model->n_bar(), 11);
  EXPECT_EQ(build_scenario(parse_scenario(quad, {"barrier.mode=aggregated"})).model->n_bar(), 7);
}

TEST(Build, ShippedScenariosLoad) {
  for (const char* name : {"linear2d", "linear2d_far", "linear2d_nobas", "quadrotor_course_a",
                           "quadrotor_course_b"}) {
    const Scenario sc = build_scenario(
        load_scenario(std::string(BAS_SDRE_SCENARIO_DIR) + "/" + name + ".cfg"));
    EXPECT_FALSE(sc.initial_conditions.empty()) << name;
  }
}

}  // namespace
}  // namespace bas_sdre
