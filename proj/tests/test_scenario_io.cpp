#include "doctest.h"
#include "test_support.hpp"

using namespace reap;
using reap::testing::load;

namespace {

const char* kMinimal = R"(
name = "tiny"
horizon = 3
reference = [0.0]

[model]
A = [[0.5]]
B = [[1.0]]
C = [[1.0]]

[constraints]
state_lower = [-1.0]
state_upper = [1.0]
input_lower = [-2.0]
input_upper = [2.0]

[cost]
Qx_diag = [1.0]
Qu_diag = [1.0]

[initial]
x0 = [0.5]
)";

}  // namespace

TEST_CASE("bundled double integrator scenario") {
  const Scenario sc = load("double_integrator");
  Matrix A(2, 2);
  A << 1, 1, 0, 1;
  CHECK((sc.model.A() - A).norm() == 0.0);
  CHECK(sc.reference(0) == 4.85);
  CHECK(sc.horizon == 5);
  CHECK(sc.X.size() == 4);
  CHECK(sc.U.size() == 4);
}

TEST_CASE("bundled drone scenario") {
  const Scenario sc = load("bebop");
  CHECK(sc.horizon == 10);
  Vector qu(3);
  qu << 30, 20, 1;
  CHECK((sc.Qu - Matrix(qu.asDiagonal())).norm() == 0.0);
  CHECK(sc.steps == 150);
  CHECK(sc.reap.budget.max_iterations == 200);
  CHECK(sc.reap.d_tau == 1e-3);
  CHECK(sc.reap.adaptive());
  CHECK(sc.model.n() == 6);
  CHECK(sc.model.p() == 3);
  CHECK(sc.model.m() == 3);
}

TEST_CASE("bundled state-constraint scenario") {
  const Scenario sc = load("bebop_state_constraints");
  CHECK(sc.X.size() == 2);
  Vector x = Vector::Zero(6);
  x(2) = -0.02;
  CHECK_FALSE(sc.X.contains(x));
  x(2) = 0.0;
  x(4) = 1.96;
  CHECK_FALSE(sc.X.contains(x));
  x(4) = 1.9;
  CHECK(sc.X.contains(x));
}

TEST_CASE("minimal scenario defaults") {
  const Scenario sc = parse_scenario_text(kMinimal);
  CHECK(sc.name == "tiny");
  CHECK(sc.reap.beta == 1e4);
  CHECK(sc.reap.epsilon == 1e-6);
  CHECK(sc.reap.psi == 1e-8);
  CHECK(sc.model.D().norm() == 0.0);
  CHECK((sc.mc_center - sc.x0).norm() == 0.0);
}

TEST_CASE("unknown keys are errors") {
  CHECK_THROWS_AS(parse_scenario_text(std::string(kMinimal) + "fo = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario_text(std::string(kMinimal) + "[reap]\nbudgett = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario_text(kMinimal, {"reap.nope=1"}), ConfigError);
  try {
    parse_scenario_text("fo = 1\n" + std::string(kMinimal));
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("fo") != std::string::npos);
    CHECK(e.line() == 1);
  }
}

TEST_CASE("syntax errors report line and column") {
  try {
    parse_scenario_text("name = \"x\"\nhorizon = = 3\n");
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() > 0);
  }
}

TEST_CASE("validation names the offending key") {
  std::string bad = kMinimal;
  bad.replace(bad.find("x0 = [0.5]"), 10, "x0 = [0.5, 1.0]");
  try {
    parse_scenario_text(bad);
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("x0") != std::string::npos);
  }
}

TEST_CASE("overrides") {
  const Scenario sc = parse_scenario_text(kMinimal, {"reap.budget=7", "reap.sigma=0.5", "horizon=2",
                                                     "reference=[0.1]"});
  CHECK(sc.reap.budget.max_iterations == 7);
  CHECK(std::get<FixedSigma>(sc.reap.sigma_policy).value == 0.5);
  CHECK(sc.horizon == 2);
  CHECK(sc.reference(0) == doctest::Approx(0.1));
  const Scenario ad = parse_scenario_text(kMinimal, {"reap.sigma=adaptive", "reap.curvature_cap=false"});
  CHECK(ad.reap.adaptive());
  CHECK_FALSE(std::get<AdaptiveSigma>(ad.reap.sigma_policy).curvature_cap);
  CHECK_THROWS_AS(parse_scenario_text(kMinimal, {"novalue"}), ConfigError);
  CHECK_THROWS_AS(parse_scenario_text(kMinimal, {"reap.sigma=fast"}), ConfigError);
}

TEST_CASE("config echo round-trips numbers") {
  const Scenario sc = load("bebop");
  const auto echo = config_echo(sc);
  CHECK_FALSE(echo.empty());
  bool saw_beta = false;
  for (const auto& [k, v] : echo) {
    if (k == "reap.beta") {
      saw_beta = true;
      CHECK(v == "10000");
    }
  }
  CHECK(saw_beta);
  CHECK(format_double(0.1) == "0.1");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("missing file") { CHECK_THROWS_AS(parse_scenario("/nonexistent/x.scenario"), ConfigError); }
