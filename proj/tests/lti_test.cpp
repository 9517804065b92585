#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "spcp/lti.hpp"

using namespace spcp;

namespace {

// Fine-step unit-step simulation of a realized model; independent of
// analytic_step_response.
std::vector<double> simulate_step(const StateSpaceModel& m, double dt, int steps) {
  std::vector<double> x(m.order, 0.0), y;
  y.push_back(m.output(x, 1.0));
  for (int k = 0; k < steps; ++k) {
    x = rk4_step(m, x, [](double) { return 1.0; }, k * dt, dt);
    y.push_back(m.output(x, 1.0));
  }
  return y;
}

}  // namespace

TEST(RationalTransferFunction, RejectsInvalidCoefficients) {
  EXPECT_THROW(RationalTransferFunction({1.0, 2.0, 3.0}, {1.0, 1.0}), ConfigError);
  EXPECT_THROW(RationalTransferFunction({1.0}, {1.0, 0.0}), ConfigError);
  EXPECT_THROW(RationalTransferFunction({1.0}, {}), ConfigError);
  EXPECT_THROW(RationalTransferFunction({}, {1.0}), ConfigError);
  EXPECT_THROW(RationalTransferFunction({NAN}, {1.0, 1.0}), ConfigError);
  EXPECT_THROW(RationalTransferFunction({1.0}, {INFINITY, 1.0}), ConfigError);
}

TEST(RationalTransferFunction, TrimsNumeratorTrailingZeros) {
  const RationalTransferFunction tf({2.0, 0.0, 0.0}, {4.0, 1.0});
  EXPECT_EQ(tf.num(), std::vector<double>{2.0});
  EXPECT_TRUE(tf.strictly_proper());
}

TEST(PIParams, ConvertsToRationalForm) {
  const auto tf = PIParams{3.0, 18.0}.to_transfer_function();
  EXPECT_EQ(tf.num(), (std::vector<double>{18.0, 3.0}));
  EXPECT_EQ(tf.den(), (std::vector<double>{0.0, 1.0}));
  EXPECT_TRUE(tf.has_integrator());
  EXPECT_THROW((PIParams{1.0, -1.0}.to_transfer_function()), ConfigError);
}

TEST(Realize, FirstOrderCanonicalForm) {
  const auto m = realize(RationalTransferFunction({2.0}, {4.0, 1.0}));
  EXPECT_EQ(m.order, 1u);
  EXPECT_EQ(m.a, std::vector<double>{-4.0});
  EXPECT_EQ(m.b, std::vector<double>{1.0});
  EXPECT_EQ(m.c, std::vector<double>{2.0});
  EXPECT_EQ(m.d, 0.0);
}

TEST(Realize, SecondOrderCompanionForm) {
  const auto m = realize(RationalTransferFunction({2.0}, {12.0, 4.0, 1.0}));
  EXPECT_EQ(m.order, 2u);
  EXPECT_EQ(m.a, (std::vector<double>{0.0, 1.0, -12.0, -4.0}));
  EXPECT_EQ(m.b, (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(m.c, (std::vector<double>{2.0, 0.0}));
  EXPECT_EQ(m.d, 0.0);
}

TEST(Realize, BiproperSplitsOffFeedthrough) {
  // (2s + 8)/(s + 4) = 2 exactly
  const auto m = realize(RationalTransferFunction({8.0, 2.0}, {4.0, 1.0}));
  EXPECT_EQ(m.d, 2.0);
  EXPECT_EQ(m.c, std::vector<double>{0.0});
}

TEST(Realize, NonMonicDenominatorAndPureGain) {
  const auto m = realize(RationalTransferFunction({6.0}, {8.0, 2.0}));  // 3/(s+4)
  EXPECT_EQ(m.a, std::vector<double>{-4.0});
  EXPECT_EQ(m.c, std::vector<double>{3.0});

  const auto gain = realize(RationalTransferFunction({3.0}, {1.0}));
  EXPECT_EQ(gain.order, 0u);
  EXPECT_EQ(gain.d, 3.0);
  EXPECT_EQ(gain.output(std::vector<double>{}, 2.0), 6.0);
}

TEST(Realize, DeterministicAndDcGainConsistent) {
  const RationalTransferFunction tf({3.0, 1.0}, {6.0, 5.0, 1.0});
  EXPECT_EQ(realize(tf), realize(tf));
  // -C A^-1 B + D for the 2x2 companion form reduces to c0 / a0.
  const auto m = realize(tf);
  const double det = m.a_at(0, 0) * m.a_at(1, 1) - m.a_at(0, 1) * m.a_at(1, 0);
  const double inv00 = m.a_at(1, 1) / det, inv01 = -m.a_at(0, 1) / det;
  const double inv10 = -m.a_at(1, 0) / det, inv11 = m.a_at(0, 0) / det;
  const double ainv_b0 = inv00 * m.b[0] + inv01 * m.b[1];
  const double ainv_b1 = inv10 * m.b[0] + inv11 * m.b[1];
  const double dc = -(m.c[0] * ainv_b0 + m.c[1] * ainv_b1) + m.d;
  EXPECT_NEAR(dc, dc_gain(tf), 1e-15);
}

TEST(DcGain, ExampleCoefficients) {
  EXPECT_DOUBLE_EQ(dc_gain(RationalTransferFunction({2.0}, {12.0, 4.0, 1.0})), 1.0 / 6.0);
  EXPECT_EQ(dc_gain(RationalTransferFunction({2.0}, {4.0, 1.0})), 0.5);
  EXPECT_EQ(dc_gain(RationalTransferFunction({4.0}, {4.0, 1.0})), 1.0);
  EXPECT_THROW(dc_gain(PIParams{3.0, 18.0}.to_transfer_function()), ConfigError);
}

TEST(Rk4Step, ScalarExponentialOneStep) {
  const auto m = realize(RationalTransferFunction({1.0}, {4.0, 1.0}));
  const auto x = rk4_step(m, std::vector<double>{0.0}, [](double) { return 1.0; }, 0.0, 0.001);
  // (1 - e^-0.004)/4
  EXPECT_NEAR(x[0], 9.98002664002131911923e-4, 1e-14);
}

TEST(Rk4Step, ZeroStaysZero) {
  const auto m = realize(RationalTransferFunction({2.0}, {12.0, 4.0, 1.0}));
  for (double dt : {1e-4, 0.1, 3.0}) {
    const auto x = rk4_step(m, std::vector<double>{0.0, 0.0}, [](double) { return 0.0; }, 0.0, dt);
    EXPECT_EQ(x, (std::vector<double>{0.0, 0.0}));
  }
}

TEST(Rk4Step, SamplesInputAtStageTimes) {
  // x' = u(t) with u(t) = t^2: RK4 is exact for cubic antiderivatives.
  StateSpaceModel integrator{1, {0.0}, {1.0}, {1.0}, 0.0};
  const auto x = rk4_step(integrator, std::vector<double>{0.0}, [](double t) { return t * t; }, 1.0, 0.5);
  EXPECT_NEAR(x[0], (1.5 * 1.5 * 1.5 - 1.0) / 3.0, 1e-15);
}

TEST(Rk4Step, FourthOrderConvergence) {
  const auto m = realize(RationalTransferFunction({1.0}, {4.0, 1.0}));
  const double horizon = 1.0;
  auto error = [&](double dt) {
    std::vector<double> x{0.0};
    const int steps = static_cast<int>(std::lround(horizon / dt));
    for (int k = 0; k < steps; ++k) x = rk4_step(m, x, [](double) { return 1.0; }, k * dt, dt);
    return std::abs(x[0] - (1.0 - std::exp(-4.0 * horizon)) / 4.0);
  };
  const double e1 = error(0.1), e2 = error(0.05), e3 = error(0.025);
  EXPECT_GE(std::log2(e1 / e2), 3.5);
  EXPECT_LE(std::log2(e1 / e2), 4.5);
  EXPECT_GE(std::log2(e2 / e3), 3.5);
  EXPECT_LE(std::log2(e2 / e3), 4.5);
}

TEST(Rk4Step, NonFiniteResultSignalsFailure) {
  const auto m = realize(RationalTransferFunction({1.0}, {-1.0, 1.0}));
  EXPECT_THROW(rk4_step(m, std::vector<double>{1e308}, [](double) { return 1e308; }, 0.0, 10.0),
               NumericFailure);
  EXPECT_THROW(rk4_step(m, std::vector<double>{0.0}, [](double) { return 0.0; }, 0.0, 0.0),
               ConfigError);
}

TEST(AnalyticStepResponse, FinalValuesAndGolden) {
  const RationalTransferFunction first({2.0}, {4.0, 1.0});
  const RationalTransferFunction second({2.0}, {12.0, 4.0, 1.0});
  EXPECT_NEAR(analytic_step_response(first, 100.0), 0.5, 1e-15);
  EXPECT_NEAR(analytic_step_response(second, 100.0), 1.0 / 6.0, 1e-15);
  // Closed form evaluated in 30-digit arithmetic and cross-checked against a
  // tight-tolerance DOP853 integration.
  EXPECT_NEAR(analytic_step_response(second, 1.0), 0.183211935331296676827, 1e-15);
  EXPECT_EQ(analytic_step_response(second, 0.0), 0.0);
}

TEST(AnalyticStepResponse, RejectsUnsupportedForms) {
  EXPECT_THROW(analytic_step_response(RationalTransferFunction({1.0}, {2.0, 3.0, 1.0}), 1.0),
               ConfigError);  // real poles
  EXPECT_THROW(analytic_step_response(RationalTransferFunction({1.0, 1.0}, {1.0, 1.0}), 1.0),
               ConfigError);  // biproper
  EXPECT_THROW(analytic_step_response(RationalTransferFunction({1.0}, {1.0, 1.0, 1.0, 1.0}), 1.0),
               ConfigError);
}

TEST(AnalyticStepResponse, MatchesSimulationWithNumeratorZero) {
  // (s + 5)/(s^2 + 2s + 10): exercises the b1 term.
  const RationalTransferFunction tf({5.0, 1.0}, {10.0, 2.0, 1.0});
  const auto y = simulate_step(realize(tf), 1e-3, 5000);
  for (int k = 0; k <= 5000; k += 250) {
    EXPECT_NEAR(y[k], analytic_step_response(tf, k * 1e-3), 1e-10) << "k=" << k;
  }
}

class PaperPlantStep : public ::testing::TestWithParam<RationalTransferFunction> {};

TEST_P(PaperPlantStep, SimulationMatchesClosedFormAndDcGain) {
  const auto& tf = GetParam();
  const auto y = simulate_step(realize(tf), 1e-3, 10000);
  double sup_ref = 0.0, sup_err = 0.0;
  for (int k = 0; k <= 10000; ++k) {
    const double ref = analytic_step_response(tf, k * 1e-3);
    sup_ref = std::max(sup_ref, std::abs(ref));
    sup_err = std::max(sup_err, std::abs(y[k] - ref));
  }
  EXPECT_LE(sup_err, 1e-7 * sup_ref);
  // >= 10 dominant time constants
  EXPECT_NEAR(y.back(), dc_gain(tf), 1e-5 * dc_gain(tf));
}

INSTANTIATE_TEST_SUITE_P(ExamplePlants, PaperPlantStep,
                         ::testing::Values(RationalTransferFunction({2.0}, {4.0, 1.0}),
                                           RationalTransferFunction({4.0}, {4.0, 1.0}),
                                           RationalTransferFunction({2.0}, {12.0, 4.0, 1.0})));
