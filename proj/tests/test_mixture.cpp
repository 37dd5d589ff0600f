#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "mixcraft/mixture.hpp"

using namespace mixcraft;
using mixcraft::testing::random_component;
using mixcraft::testing::random_model;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Component standard(Eigen::Index d, double at = 0.0) { return Component(Vector::Constant(d, at), SymMatrix::identity(d)); }

}  // namespace

TEST(ComponentPdf, StandardModes) {
  EXPECT_NEAR(component_pdf(standard(2), Vector::Zero(2)), 0.1591549, 1e-7);
  EXPECT_NEAR(component_pdf(standard(1), Vector::Zero(1)), 0.3989423, 1e-7);
  const Component wide(Vector::Zero(2), SymMatrix::diagonal(vec({4, 4})));
  EXPECT_NEAR(component_pdf(wide, Vector::Zero(2)), 1.0 / (8.0 * std::numbers::pi), 1e-12);
}

TEST(ComponentPdf, RejectsBadShapes) {
  EXPECT_THROW(component_pdf(standard(2), Vector::Zero(3)), Error);
  EXPECT_THROW(Component(Vector::Zero(3), SymMatrix::identity(2)), Error);
  EXPECT_THROW(Component(Vector::Zero(2), SymMatrix::diagonal(vec({1, 0}))), Error);
}

TEST(MixturePdf, Reductions) {
  const Component a = standard(2, 1.0);
  const MixtureModel single({1.0}, {a});
  const Vector y = vec({0.3, -0.2});
  EXPECT_NEAR(mixture_pdf(single, y), component_pdf(a, y), 1e-15);
  const MixtureModel twin({0.3, 0.7}, {a, a});
  EXPECT_NEAR(mixture_pdf(twin, y), component_pdf(a, y), 1e-15);
}

TEST(MixturePdf, FarComponentIsNegligible) {
  const MixtureModel m({0.5, 0.5}, {standard(1, -10.0), standard(1, 10.0)});
  EXPECT_NEAR(mixture_pdf(m, vec({10.0})), 0.5 * 0.3989422804014327, 1e-15);
}

TEST(MixtureModelTest, ValidatesWeights) {
  EXPECT_THROW(MixtureModel({0.5, 0.4}, {standard(1), standard(1)}), Error);
  EXPECT_THROW(MixtureModel({1.0, 0.0}, {standard(1), standard(1)}), Error);
  EXPECT_THROW(MixtureModel({1.0}, {standard(1), standard(1)}), Error);
  EXPECT_THROW(MixtureModel({0.5, 0.5}, {standard(1), standard(2)}), Error);
}

TEST(LogLikelihood, SinglePointAndWeighting) {
  const MixtureModel m({1.0}, {standard(1)});
  EXPECT_NEAR(log_likelihood(m, Dataset("x", Matrix::Zero(1, 1))), -0.9189385332046727, 1e-12);
  const std::vector<double> k{2.0};
  EXPECT_NEAR(log_likelihood(m, Matrix::Zero(1, 1), k), 2.0 * -0.9189385332046727, 1e-12);
}

TEST(LogLikelihood, FarPointsStayFiniteInLogDomain) {
  const MixtureModel m({1.0}, {standard(1)});
  Matrix far(2, 1);
  far << 0.0, 1e3;
  EXPECT_NEAR(log_likelihood(m, Dataset("x", far)), 2.0 * -0.9189385332046727 - 0.5e6, 1e-6);
}

TEST(Posterior, Examples) {
  const Vector y = vec({0.0});
  EXPECT_NEAR(posterior_tau(MixtureModel({1.0}, {standard(1)}), y)(0), 1.0, 1e-15);
  const Vector sym = posterior_tau(MixtureModel({0.5, 0.5}, {standard(1, -2.0), standard(1, 2.0)}), y);
  EXPECT_NEAR(sym(0), 0.5, 1e-15);
  EXPECT_NEAR(sym(1), 0.5, 1e-15);
  const Vector twin = posterior_tau(MixtureModel({0.9, 0.1}, {standard(1), standard(1)}), y);
  EXPECT_NEAR(twin(0), 0.9, 1e-15);
  EXPECT_NEAR(twin(1), 0.1, 1e-15);
}

TEST(Moments, Examples) {
  const MomentPair zero_mean = moments_from_component(Component(Vector::Zero(2), SymMatrix::diagonal(vec({2, 3}))), 0.4);
  EXPECT_EQ(zero_mean.V, SymMatrix::diagonal(vec({2, 3})).matrix());
  EXPECT_EQ(zero_mean.w, 0.4);
  const MomentPair scalar = moments_from_component(Component(vec({2}), SymMatrix::diagonal(vec({3}))), 1.0);
  EXPECT_DOUBLE_EQ(scalar.m(0), 2.0);
  EXPECT_DOUBLE_EQ(scalar.V(0, 0), 7.0);
  const MomentPair shifted = moments_from_component(Component(vec({1, 0}), SymMatrix::identity(2)), 1.0);
  Matrix expected(2, 2);
  expected << 2, 0, 0, 1;
  EXPECT_EQ(shifted.V, expected);
}

TEST(Moments, InverseExamples) {
  const Component back = component_from_moments(MomentPair{vec({2}), Matrix::Constant(1, 1, 7.0), 1.0});
  EXPECT_DOUBLE_EQ(back.mu()(0), 2.0);
  EXPECT_DOUBLE_EQ(back.sigma()(0, 0), 3.0);
  const Component unit = component_from_moments(MomentPair{Vector::Zero(2), Matrix::Identity(2, 2), 1.0});
  EXPECT_EQ(unit.sigma(), SymMatrix::identity(2));
  const Vector m = vec({1, 2});
  EXPECT_THROW(component_from_moments(MomentPair{m, m * m.transpose(), 1.0}), Error);
}

TEST(Sampling, LawOfLargeNumbers) {
  auto rng = SeededGenerator::substream(11, "sample");
  const LabeledDataset s = sample(MixtureModel({1.0}, {standard(2)}), {1000}, rng);
  ASSERT_EQ(s.data.n(), 1000);
  const Vector mean = s.data.values.colwise().mean().transpose();
  const Matrix centered = s.data.values.rowwise() - mean.transpose();
  const Matrix cov = centered.transpose() * centered / 999.0;
  EXPECT_LT(mean.cwiseAbs().maxCoeff(), 0.1);
  EXPECT_LT((cov - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 0.1);
}

TEST(Sampling, ZeroCountsAndDeterminism) {
  const MixtureModel m({0.5, 0.5}, {standard(2, -3.0), standard(2, 3.0)});
  auto rng1 = SeededGenerator::substream(5, "sample");
  auto rng2 = SeededGenerator::substream(5, "sample");
  const LabeledDataset a = sample(m, {0, 40}, rng1);
  const LabeledDataset b = sample(m, {0, 40}, rng2);
  EXPECT_EQ(a.data.values, b.data.values);
  for (int label : a.labels) EXPECT_EQ(label, 2);
}

TEST(Generator, SingleComponentAndIsotropicEigenvalues) {
  GeneratorSpec spec;
  spec.c = 1;
  spec.seed = 3;
  EXPECT_DOUBLE_EQ(generate_random_model(spec).model.w()[0], 1.0);
  spec.c = 4;
  spec.lambda_range = {5.0, 5.0};
  const GeneratedModel g = generate_random_model(spec);
  for (const auto& comp : g.model.components()) {
    EXPECT_LT((comp.sigma().matrix() - 5.0 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Generator, LargeScaleWeightsAreModest) {
  GeneratorSpec spec;
  spec.c = 20;
  spec.n = 50000;
  spec.seed = 1;
  const GeneratedModel g = generate_random_model(spec);
  const auto [lo, hi] = std::minmax_element(g.model.w().begin(), g.model.w().end());
  EXPECT_GE(*lo, 0.1 / (0.1 + 19 * 0.9));
  EXPECT_LE(*hi, 0.9 / (0.9 + 19 * 0.1));
  EXPECT_LT(*hi / *lo, 9.0 + 1e-12);
  long total = 0;
  for (long k : g.n_per_component) total += k;
  EXPECT_NEAR(static_cast<double>(total), 50000.0, 10.0);
}

TEST(MixtureProperties, DensityIntegratesToOne) {
  auto rng = SeededGenerator::substream(7, "integral");
  for (int trial = 0; trial < 5; ++trial) {
    const MixtureModel m = random_model(2, 3, rng);
    Vector lo = Vector::Constant(2, 1e300), hi = Vector::Constant(2, -1e300);
    for (const auto& c : m.components()) {
      const Vector sd = c.sigma().diag().cwiseSqrt();
      lo = lo.cwiseMin(c.mu() - 8.0 * sd);
      hi = hi.cwiseMax(c.mu() + 8.0 * sd);
    }
    const int steps = 400;
    const Vector h = (hi - lo) / steps;
    Matrix grid((steps + 1) * (steps + 1), 2);
    for (int a = 0; a <= steps; ++a)
      for (int b = 0; b <= steps; ++b) grid.row(a * (steps + 1) + b) << lo(0) + a * h(0), lo(1) + b * h(1);
    const Vector lp = m.log_pdf_rows(grid);
    double total = 0.0;
    for (int a = 0; a <= steps; ++a)
      for (int b = 0; b <= steps; ++b) {
        const double wa = (a == 0 || a == steps) ? 0.5 : 1.0;
        const double wb = (b == 0 || b == steps) ? 0.5 : 1.0;
        total += wa * wb * std::exp(lp(a * (steps + 1) + b));
      }
    EXPECT_NEAR(total * h.prod(), 1.0, 1e-2);
  }
}

TEST(MixtureProperties, MomentRoundTrip) {
  auto rng = SeededGenerator::substream(8, "moments");
  for (Eigen::Index d : {1, 2, 3, 5}) {
    for (int trial = 0; trial < 50; ++trial) {
      const Component c = random_component(d, rng);
      const Component back = component_from_moments(moments_from_component(c, 1.0));
      EXPECT_LT((back.mu() - c.mu()).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((back.sigma().matrix() - c.sigma().matrix()).cwiseAbs().maxCoeff(), 1e-12 * 100);
    }
  }
}

TEST(MixtureProperties, GeneratedEigenvaluesStayInRange) {
  auto rng = SeededGenerator::substream(9, "eig");
  GeneratorSpec spec;
  spec.d = 3;
  spec.c = 10;
  const GeneratedModel g = generate_random_model(spec, rng);
  for (const auto& c : g.model.components()) {
    const Eigen::SelfAdjointEigenSolver<Matrix> es(c.sigma().matrix());
    EXPECT_GE(es.eigenvalues().minCoeff(), 1.0 - 1e-9);
    EXPECT_LE(es.eigenvalues().maxCoeff(), 100.0 + 1e-9);
  }
}

TEST(MixtureProperties, PosteriorSumsToOneAndIgnoresWeightScale) {
  auto rng = SeededGenerator::substream(10, "tau");
  for (int trial = 0; trial < 100; ++trial) {
    const MixtureModel m = random_model(2, 1 + rng.below(5), rng);
    const Vector y = mixcraft::testing::random_vector(2, rng);
    const Vector tau = posterior_tau(m, y);
    EXPECT_NEAR(tau.sum(), 1.0, 1e-12);
    EXPECT_GE(tau.minCoeff(), 0.0);
    std::vector<double> scaled = m.w();
    double total = 0.0;
    for (double& x : scaled) total += (x *= 3.7);
    for (double& x : scaled) x /= total;
    const Vector again = posterior_tau(MixtureModel(scaled, m.components()), y);
    EXPECT_LT((tau - again).cwiseAbs().maxCoeff(), 1e-12);
  }
}
