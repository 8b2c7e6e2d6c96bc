#include "holopt/systems.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <stdexcept>

namespace holopt {
namespace {

TEST(Presets, EnsembleValues) {
  const auto p = preset(SystemName::ensemble_rei);
  EXPECT_DOUBLE_EQ(p.tau, 0.75e-6);
  EXPECT_DOUBLE_EQ(p.profile.gamma1, kTwoPi * 970.0);
  EXPECT_DOUBLE_EQ(p.profile.gamma2, kTwoPi * 1210.0);
  EXPECT_EQ(p.profile.gamma3, 0.0);
  EXPECT_TRUE(p.compensation);
  EXPECT_EQ(p.profile.sigma2, Sigma2Variant::lambda_rei);
  ASSERT_TRUE(p.offres_range.has_value());
  EXPECT_DOUBLE_EQ(p.offres_range->lo_hz, 3.5e6);
  EXPECT_DOUBLE_EQ(p.offres_range->hi_hz, 5e6);
  EXPECT_DOUBLE_EQ(p.robustness_range.hi_hz, 170e3);
}

TEST(Presets, SingleAndTransmonValues) {
  const auto s = preset(SystemName::single_rei);
  EXPECT_DOUBLE_EQ(s.tau, 1e-6);
  EXPECT_DOUBLE_EQ(s.profile.gamma1, kTwoPi * 80.0);
  EXPECT_DOUBLE_EQ(s.profile.gamma2, kTwoPi * 60.0);
  EXPECT_FALSE(s.compensation);
  EXPECT_DOUBLE_EQ(s.offres_threshold_hz, 8.9e6);

  const auto t = preset(SystemName::transmon);
  EXPECT_DOUBLE_EQ(t.tau, 40e-9);
  EXPECT_DOUBLE_EQ(t.profile.gamma1, kTwoPi * 3e3);
  EXPECT_DOUBLE_EQ(t.profile.gamma2, kTwoPi * 3e3);
  EXPECT_EQ(t.profile.sigma2, Sigma2Variant::transmon_ladder);
  EXPECT_TRUE(t.compensation);
  EXPECT_FALSE(t.offres_range.has_value());
}

TEST(Presets, ValidateRejectsBadValues) {
  auto p = preset(SystemName::ensemble_rei);
  p.tau = -1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = preset(SystemName::ensemble_rei);
  p.profile.gamma2 = -1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = preset(SystemName::ensemble_rei);
  p.robustness_range = {1.0, -1.0};
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(GateCatalog, Angles) {
  EXPECT_DOUBLE_EQ(gate_catalog(GateName::not_gate).params.theta, kPi / 2);
  EXPECT_DOUBLE_EQ(gate_catalog(GateName::hadamard).params.theta, kPi / 4);
  EXPECT_DOUBLE_EQ(gate_catalog(GateName::sigma_y).params.phi, kPi / 2);
  EXPECT_DOUBLE_EQ(gate_catalog(GateName::sigma_z).params.theta, 0.0);
  for (auto g : all_gates()) EXPECT_DOUBLE_EQ(gate_catalog(g).params.beta, kPi);
}

TEST(Tables, PublishedRowsMeetConstraints) {
  for (auto s : all_systems()) {
    const auto r = validate_coefficients(table1_coefficients(s), kPrintedTolerance);
    EXPECT_TRUE(r.passed) << to_string(s);
  }
  for (auto g : all_gates()) {
    EXPECT_TRUE(validate_coefficients(table3_coefficients(g), kConstraintTolerance).passed)
        << to_string(g);
  }
  for (int k = 6; k <= 16; k += 2) {
    const auto c = table4_coefficients(k);
    EXPECT_EQ(c.harmonics(), k);
    EXPECT_TRUE(validate_coefficients(c, 2e-3).passed) << "K=" << k;
  }
  EXPECT_THROW(table4_coefficients(4), std::invalid_argument);
  EXPECT_THROW(table4_coefficients(7), std::invalid_argument);
}

TEST(Tables, SpotValues) {
  EXPECT_DOUBLE_EQ(table1_coefficients(SystemName::transmon).alpha(1), -0.8);
  EXPECT_DOUBLE_EQ(table3_coefficients(GateName::sigma_z).alpha(1), 0.7261);
  EXPECT_DOUBLE_EQ(table4_coefficients(6).alpha(4), -0.7983);
  EXPECT_DOUBLE_EQ(alternative_coefficients().alpha(2), -0.5553);
  EXPECT_DOUBLE_EQ(baseline_coefficients(1.0).alpha(2), -0.25);
}

TEST(PresetSchedule, SegmentCountFollowsCompensation) {
  for (auto s : all_systems()) {
    const auto p = preset(s);
    const auto sched = preset_schedule(p, gate_catalog(GateName::not_gate), table1_coefficients(s));
    EXPECT_EQ(sched.segments().size(), p.compensation ? 4u : 2u);
    EXPECT_DOUBLE_EQ(sched.segments().front().duration, p.tau);
  }
  // The single-ion row misses the tight tolerance.
  const auto single = preset(SystemName::single_rei);
  EXPECT_THROW(preset_schedule(single, gate_catalog(GateName::not_gate),
                               table1_coefficients(SystemName::single_rei), kConstraintTolerance),
               std::invalid_argument);
}

TEST(PresetSchedule, RescalesTau) {
  const auto p = preset(SystemName::transmon);
  const auto sched = preset_schedule(p, gate_catalog(GateName::hadamard), baseline_coefficients(1.0));
  EXPECT_DOUBLE_EQ(sched.end(), 4 * p.tau);
}

TEST(Names, ParseAndPrintRoundTrip) {
  for (auto s : all_systems()) EXPECT_EQ(parse_system(to_string(s)), s);
  for (auto g : all_gates()) EXPECT_EQ(parse_gate(to_string(g)), g);
  EXPECT_EQ(parse_sigma2("ladder"), Sigma2Variant::transmon_ladder);
  EXPECT_THROW(parse_system("qutrit"), std::invalid_argument);
  EXPECT_THROW(parse_gate("cnot"), std::invalid_argument);
  EXPECT_THROW(parse_sigma2("x"), std::invalid_argument);
}

TEST(Json, PresetDump) {
  const auto j = to_json(preset(SystemName::transmon));
  EXPECT_EQ(j["name"], "transmon");
  EXPECT_EQ(j["sigma2"], "ladder");
  EXPECT_TRUE(j["offres_range_hz"].is_null());
  const auto c = to_json(table1_coefficients(SystemName::ensemble_rei));
  EXPECT_EQ(c["alphas"].size(), 4u);
}

}  // namespace
}  // namespace holopt
