#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "diffint/schemes.hpp"

using namespace diffint;

namespace {

constexpr double pi = std::numbers::pi;

// Fig. 3 caption operating point.
const LightConfig caption_light{1e11, 3.23e-10};
const double caption_nchi2 = 1e11 * 3.23e-10 * 3.23e-10;

EnsembleConfig symmetric(double n, double alpha = 0.0, double phi = 0.0, double theta = 0.0) {
  return EnsembleConfig::from_counts(n, n, alpha, phi, theta);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(SchemeNames, RoundTrip) {
  for (Scheme s : all_schemes) EXPECT_EQ(parse_scheme(scheme_name(s)), s);
  EXPECT_FALSE(parse_scheme("bogus").has_value());
}

TEST(Coherent, Examples) {
  EXPECT_DOUBLE_EQ(eval_cs(symmetric(1e10)).variance(), 5e-11);
  EXPECT_DOUBLE_EQ(eval_cs(symmetric(1e10, 0.0, 0.25)).mean, 0.25);
  EXPECT_DOUBLE_EQ(eval_cs(symmetric(1.0)).variance(), 0.5);
  const auto e = eval_cs(symmetric(1e10, 0.02, 0.01));
  EXPECT_NEAR(e.variance(), 5.4e-11, 1e-12 * 5.4e-11);
  EXPECT_NEAR(e.mean, 0.01 - 4e-12, 1e-18);
  EXPECT_NEAR(e.bias("detection"), -4e-12, 1e-24);
}

TEST(Coherent, UnequalEnsembles) {
  const auto c = EnsembleConfig::from_counts(3e4, 1e4, 0.01, 0.0, 0.0);
  EXPECT_NEAR(eval_cs(c).breakdown.projection, 1 / (4 * 3e4) + 1 / (4 * 1e4), 1e-18);
  EXPECT_NEAR(eval_cs(c).breakdown.detection, 0.01 * (1 / 3e4 + 1 / 1e4), 1e-18);
}

TEST(SeparatelySqueezed, CaptionPoint) {
  const double oracle = 2.0 / (caption_nchi2 * 1e20);
  const auto e = eval_ss(symmetric(1e10), caption_light);
  EXPECT_NEAR(e.variance(), oracle, 1e-12 * oracle);
  EXPECT_NEAR(e.variance(), 1.917e-12, 0.001e-12);
  EXPECT_NEAR(e.variance() / eval_cs(symmetric(1e10)).variance(), 0.0383, 0.0001);
  EXPECT_NEAR(10 * std::log10(e.variance() / 5e-11), -14.2, 0.05);
}

TEST(SeparatelySqueezed, UnitSqueezingStrength) {
  const LightConfig unit{1e8, 1e-4};  // n chi^2 = 1
  EXPECT_NEAR(eval_ss(symmetric(300.0), unit).variance(), 2.0 / (300.0 * 300.0), 1e-15);
}

TEST(SeparatelySqueezed, SmallDetectionNoiseAddsAlphaTimesTwoOverN) {
  const double base = 2.0 / (caption_nchi2 * 1e20);
  const auto e = eval_ss(symmetric(1e10, 2e-7), caption_light);
  EXPECT_NEAR(e.variance(), base + 2e-7 * 2e-10, 1e-12 * base);
}

TEST(SeparatelySqueezed, ZeroCouplingRejected) {
  EXPECT_THROW(eval_ss(symmetric(1e4), LightConfig{1e7, 0.0}), InvalidParameter);
  EXPECT_THROW(eval_ss_plus(symmetric(1e4), LightConfig{1e7, 0.0}), InvalidParameter);
  EXPECT_THROW(eval_js(symmetric(1e4), LightConfig{1e7, 0.0}), InvalidParameter);
  EXPECT_THROW(eval_ee(symmetric(1e4), LightConfig{1e7, 0.0}, pi / 4), InvalidParameter);
}

TEST(SeparatelySqueezedReadout, Examples) {
  const auto ss = eval_ss(symmetric(1e10), caption_light);
  const auto plus = eval_ss_plus(symmetric(1e10), caption_light);
  EXPECT_NEAR(plus.breakdown.projection, 2 * ss.breakdown.projection, 1e-24);
  EXPECT_NEAR(plus.breakdown.projection, 3.834e-12, 0.001e-12);
  EXPECT_EQ(eval_ss_plus(symmetric(1e10, 0.3), caption_light).breakdown.detection, 0.0);
  const auto noisy = eval_ss_plus(symmetric(1e10, 2e-2, 0.01, 0.01), caption_light);
  EXPECT_NEAR(noisy.breakdown.detection, 2e-2 * 2e-4 * 0.25 * 2e-10, 1e-28);
  EXPECT_NEAR(noisy.breakdown.detection, 2e-16, 1e-28);
}

TEST(JointlySqueezed, Examples) {
  const auto js = eval_js(symmetric(1e10), caption_light);
  EXPECT_NEAR(js.variance(), 1.0 / (caption_nchi2 * 1e20), 1e-24);
  EXPECT_NEAR(js.variance(), 9.585e-13, 0.001e-13);
  EXPECT_NEAR(js.variance(), 0.5 * eval_ss(symmetric(1e10), caption_light).variance(), 1e-27);

  // gamma = sqrt(8 Nbar) puts the mismatch term at 1/Nbar, but its gap sqrt(8) Nbar exceeds 2 Nbar.
  const double nbar = 1e6;
  EXPECT_THROW(EnsembleConfig::from_mean(nbar, std::sqrt(8 * nbar), 0.0, 0.0, 0.0), InvalidParameter);
  const auto half = eval_js(EnsembleConfig::from_mean(nbar, std::sqrt(8 * nbar) / 2, 0.0, 0.0, 0.0), caption_light);
  EXPECT_NEAR(half.breakdown.mismatch, 0.25 / nbar, 1e-12 / nbar);

  const auto real = eval_js(EnsembleConfig::from_mean(1e10, 1e4, 2e-2, 0.01, 0.01), caption_light);
  EXPECT_NEAR(real.breakdown.detection, 4e-12, 1e-24);
  EXPECT_NEAR(real.breakdown.mismatch, 1.25e-13, 1e-25);
  EXPECT_NEAR(real.mean, 0.01 - 4e-12, 1e-18);
}

TEST(JointlySqueezedReadout, ThetaBias) {
  EXPECT_EQ(eval_js_plus(symmetric(1e10, 0.0, 0.01, 0.01), caption_light).bias("theta-mismatch"), 0.0);
  const auto e = eval_js_plus(EnsembleConfig::from_mean(1e10, 1e4, 0.0, 0.01, 0.01), caption_light);
  // (N_L - N_J)/(N_L + N_J) theta with N_J - N_L = gamma sqrt(Nbar).
  const double oracle = -0.01 * 1e4 * 1e5 / (2 * 1e10);
  EXPECT_NEAR(e.bias("theta-mismatch"), oracle, 1e-15);
  EXPECT_NEAR(std::abs(e.bias("theta-mismatch")), 5e-4, 1e-15);
}

TEST(JointlySqueezedReadout, ProjectionIsTwiceJoint) {
  const auto cfg = EnsembleConfig::from_mean(1e8, 3.0, 1e-3, 0.02, 0.05);
  EXPECT_NEAR(eval_js_plus(cfg, caption_light).breakdown.projection,
              2 * eval_js(cfg, caption_light).breakdown.projection, 1e-30);
}

TEST(JointlySqueezedCorrected, Examples) {
  const auto e = eval_js_plus_corrected(symmetric(1e10), caption_light);
  EXPECT_NEAR(e.variance(), 2.0 / (caption_nchi2 * 1e20), 1e-24);
  EXPECT_NEAR(e.variance(), 0.5 * eval_ss_plus(symmetric(1e10), caption_light).variance(), 1e-27);
  EXPECT_EQ(eval_js_plus_corrected(symmetric(1e10, 0.5, 0.0, 0.3), caption_light).breakdown.detection, 0.0);

  const auto real = eval_js_plus_corrected(EnsembleConfig::from_mean(1e10, 1e4, 2e-2, 0.01, 0.01), caption_light);
  const double oracle = 2.0 / (caption_nchi2 * 1e20) + 2e-2 * 1e-4 / 2e10 + 1e8 / 8e20;
  EXPECT_NEAR(real.variance(), oracle, 1e-12 * oracle);
  EXPECT_NEAR(real.breakdown.detection, 1e-16, 1e-28);
  EXPECT_NEAR(real.breakdown.mismatch, 1.25e-13, 1e-25);
}

TEST(Entangled, Examples) {
  const auto ee = eval_ee(symmetric(1e10), caption_light, pi / 4);
  const double oracle = 4.0 / (1e20 * caption_nchi2);
  EXPECT_NEAR(ee.phi.variance(), oracle, 1e-12 * oracle);
  EXPECT_NEAR(ee.theta.variance(), oracle, 1e-12 * oracle);
  EXPECT_NEAR(ee.phi.variance(), 3.834e-12, 0.001e-12);

  const auto near_zero = eval_ee(symmetric(1e10), caption_light, 1e-6);
  EXPECT_NEAR(near_zero.phi.variance(), 2.0 / (1e20 * caption_nchi2), 1e-9 * oracle);
  EXPECT_GT(near_zero.theta.variance(), 1e10 * oracle);

  EXPECT_THROW(eval_ee(symmetric(1e10), caption_light, 0.0), DegenerateTilt);
  EXPECT_THROW(eval_ee(symmetric(1e10), caption_light, pi / 2), DegenerateTilt);
}

TEST(Entangled, TiltTradeOffIsConstant) {
  const auto cfg = symmetric(1e9);
  const double oracle = 2 * 2.0 / (1e18 * caption_nchi2);
  for (double tilt : {0.1, 0.4, pi / 4, 1.0, 1.4}) {
    const auto ee = eval_ee(cfg, caption_light, tilt);
    const double c2 = std::cos(tilt) * std::cos(tilt);
    EXPECT_NEAR(ee.phi.variance() * c2 + ee.theta.variance() * (1 - c2), oracle, 1e-12 * oracle);
  }
}

TEST(Entangled, MeanCarriesCrossTerm) {
  const auto cfg = EnsembleConfig::from_counts(1.01e6, 0.99e6, 0.0, 0.02, 0.03);
  const auto ee = eval_ee(cfg, LightConfig{1e7, 1e-4}, pi / 4);
  EXPECT_NEAR(ee.phi.mean, 0.02 + (-0.02e6 / 2e6) * 0.03, 1e-15);
  EXPECT_NEAR(ee.theta.mean, 0.03 + (-0.02e6 / 2e6) * 0.02, 1e-15);
}

TEST(SchemeProperties, FactorTwoLawAtRandomPoints) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const auto cfg = symmetric(std::pow(10.0, 2 + 10 * u(rng)), 0.0, u(rng) - 0.5, u(rng) - 0.5);
    const LightConfig light{std::pow(10.0, 5 + 7 * u(rng)), std::pow(10.0, -11 + 7 * u(rng))};
    EXPECT_NEAR(eval_js(cfg, light).variance() / eval_ss(cfg, light).variance(), 0.5, 1e-15);
    EXPECT_NEAR(eval_js_plus_corrected(cfg, light).variance() / eval_ss_plus(cfg, light).variance(), 0.5, 1e-15);
  }
}

TEST(SchemeProperties, HeisenbergScalingAtZeroNoise) {
  for (Scheme s : all_schemes) {
    if (s == Scheme::cs) continue;
    const SchemeId id = s == Scheme::ee ? SchemeId::entangled(0.6) : SchemeId{s};
    const double v1 = evaluate(id, symmetric(1e7, 0.0, 0.01, 0.01), caption_light).variance();
    const double v2 = evaluate(id, symmetric(2e7, 0.0, 0.01, 0.01), caption_light).variance();
    EXPECT_NEAR(v2 / v1, 0.25, 1e-12) << scheme_name(s);
  }
}

TEST(SchemeProperties, NoiseTermsVanishWhenSourcesOff) {
  for (Scheme s : all_schemes) {
    const SchemeId id = s == Scheme::ee ? SchemeId::entangled(0.6) : SchemeId{s};
    const auto e = evaluate(id, symmetric(1e8, 0.0, 0.02, 0.03), caption_light);
    EXPECT_EQ(e.breakdown.detection, 0.0) << scheme_name(s);
    EXPECT_EQ(e.breakdown.mismatch, 0.0) << scheme_name(s);
    EXPECT_EQ(e.mean, 0.02) << scheme_name(s);
    EXPECT_NEAR(e.variance(), e.breakdown.projection, 1e-12 * e.variance());
  }
  EXPECT_EQ(eval_ee(symmetric(1e8, 0.0, 0.02, 0.03), caption_light, 0.6).theta.mean, 0.03);
}

TEST(SchemeProperties, MonotoneInPhotonsAlphaGamma) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double nbar = std::pow(10.0, 6 + 4 * u(rng));
    const double alpha = 0.01 * u(rng), gamma = 20 * u(rng), phi = 0.02 * u(rng), theta = 0.02 * u(rng);
    const LightConfig light{std::pow(10.0, 9 + 2 * u(rng)), 3.23e-10};
    LightConfig brighter = light;
    brighter.photons *= 2;
    for (Scheme s : all_schemes) {
      const SchemeId id = s == Scheme::ee ? SchemeId::entangled(0.6) : SchemeId{s};
      const auto base = EnsembleConfig::from_mean(nbar, gamma, alpha, phi, theta);
      const double v = evaluate(id, base, light).variance();
      EXPECT_LE(evaluate(id, base, brighter).variance(), v * (1 + 1e-14)) << scheme_name(s);
      EXPECT_GE(evaluate(id, EnsembleConfig::from_mean(nbar, gamma, 2 * alpha + 1e-4, phi, theta), light).variance(),
                v * (1 - 1e-14))
          << scheme_name(s);
      EXPECT_GE(evaluate(id, EnsembleConfig::from_mean(nbar, 2 * gamma + 1, alpha, phi, theta), light).variance(),
                v * (1 - 1e-12))
          << scheme_name(s);
    }
  }
}

TEST(SchemeProperties, BreakdownEntriesNonNegativeAndSumToTotal) {
  const auto cfg = EnsembleConfig::from_mean(1e9, 30.0, 1e-3, 0.01, -0.02);
  for (Scheme s : all_schemes) {
    const SchemeId id = s == Scheme::ee ? SchemeId::entangled(0.6) : SchemeId{s};
    const auto e = evaluate(id, cfg, caption_light);
    const auto& b = e.breakdown;
    EXPECT_GE(b.projection, 0.0);
    EXPECT_GE(b.detection, 0.0);
    EXPECT_GE(b.mismatch, 0.0);
    EXPECT_NEAR(e.variance(), b.projection + b.detection + b.mismatch + b.decoherence, 1e-12 * e.variance());
    EXPECT_LT(rel(e.variance(), evaluate(id, cfg, caption_light).variance()), 1e-15);
  }
}

TEST(Assumptions, CaptionParametersSatisfiedExceptThetaBias) {
  const auto cfg = EnsembleConfig::from_mean(1e10, 10.0, 2e-7, 0.01, 0.01);
  for (Scheme s : all_schemes) {
    const SchemeId id = s == Scheme::ee ? SchemeId::entangled(pi / 4) : SchemeId{s};
    const auto report = check_assumptions(cfg, caption_light, id);
    if (s == Scheme::js_plus) {
      // gamma^2 Nbar n chi^2 theta^2 / 8 = 100 * 1e10 * 1.043e-8 * 1e-4 / 8 = 0.13
      const auto* tb = report.find("theta_bias");
      ASSERT_NE(tb, nullptr);
      EXPECT_NEAR(tb->ratio, 100 * 1e10 * caption_nchi2 * 1e-4 / 8, 1e-12);
      EXPECT_FALSE(tb->satisfied);
    } else {
      EXPECT_TRUE(report.all_satisfied()) << scheme_name(s);
    }
  }
}

TEST(Assumptions, ZeroCouplingAllRatiosZero) {
  const auto cfg = EnsembleConfig::from_mean(1e10, 10.0, 0.0, 0.01, 0.01);
  for (Scheme s : all_schemes) {
    const SchemeId id = s == Scheme::ee ? SchemeId::entangled(pi / 4) : SchemeId{s};
    const auto report = check_assumptions(cfg, LightConfig{1e11, 0.0}, id);
    EXPECT_TRUE(report.all_satisfied());
    for (const auto& c : report.checks) EXPECT_EQ(c.ratio, 0.0) << c.name;
  }
}

TEST(Assumptions, LargeMismatchFlaggedForJoint) {
  const auto cfg = EnsembleConfig::from_mean(1e10, 1e4, 0.0, 0.0, 0.0);
  const LightConfig light{1e11, std::sqrt(1.04e-8 / 1e11)};
  const auto report = check_assumptions(cfg, light, SchemeId{Scheme::js});
  const auto* jm = report.find("joint_mismatch");
  ASSERT_NE(jm, nullptr);
  EXPECT_NEAR(jm->ratio, 0.13, 1e-12);
  EXPECT_FALSE(jm->satisfied);
  EXPECT_FALSE(report.all_satisfied());
}

TEST(Assumptions, ThresholdIsStrict) {
  const auto cfg = symmetric(1e4);
  const LightConfig light{1e7, 1e-4};
  const auto r = check_assumptions(cfg, light, SchemeId{Scheme::ss}, 1e-4);
  const auto* c = r.find("nbar_chi2");
  ASSERT_NE(c, nullptr);
  EXPECT_NEAR(c->ratio, 1e-4, 1e-18);
  EXPECT_EQ(c->satisfied, c->ratio < 1e-4);
  EXPECT_TRUE(check_assumptions(cfg, light, SchemeId{Scheme::cs}).checks.empty());
}

TEST(Assumptions, EntangledHigherOrderFlaggedAtDeskScale) {
  const auto report = check_assumptions(symmetric(1e4), LightConfig{1e7, 1e-4}, SchemeId::entangled(pi / 4));
  const auto* c = report.find("ee_higher_order");
  ASSERT_NE(c, nullptr);
  EXPECT_NEAR(c->ratio, 1e4 * 1e-3 / 32, 1e-12);
  EXPECT_FALSE(c->satisfied);
}
