#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "ballab/dynamics.hpp"
#include "test_support.hpp"

using namespace ballab;
using namespace ballab::dynamics;
using ballab::testing::poly1;
using ballab::testing::rotation;
using ballab::testing::vec;

namespace {

HoloMap diag(std::initializer_list<Complex> d) {
  ComplexMat m = ComplexMat::Zero(d.size(), d.size());
  int i = 0;
  for (auto x : d) m(i, i) = x, ++i;
  return HoloMap::linear(m);
}

// (1 + z1)/2, z2/2
HoloMap affine_pair() {
  Polynomial a(2), b(2);
  a.add_term({0, 0}, 0.5);
  a.add_term({1, 0}, 0.5);
  b.add_term({0, 1}, 0.5);
  return HoloMap::power_series(2, {a, b});
}

HoloMap hyperbolic() {
  // (z + 1/2)/(1 + z/2) = phi_{1/2}(-z)
  return HoloMap::chain({HoloMap::linear(-ComplexMat::Identity(1, 1)), HoloMap::automorphism(vec({0.5}))});
}

double sample_sup(const std::function<double(const ComplexVec&)>& f, int n) {
  double worst = 0.0;
  for (const auto& z : ball_samples(n, 200, 0.9, 5)) worst = std::max(worst, f(z));
  return worst;
}

}  // namespace

TEST(FixedPoint, Examples) {
  auto p = find_interior_fixed_point(diag({0.5}));
  ASSERT_TRUE(p);
  EXPECT_LT(p->norm(), 1e-10);

  EXPECT_FALSE(find_interior_fixed_point(poly1({0.5, 0.5})));
  EXPECT_FALSE(find_interior_fixed_point(hyperbolic()));

  auto q = find_interior_fixed_point(diag({0.5, 1.0}));
  ASSERT_TRUE(q);
  EXPECT_LT(std::abs((*q)[0]), 1e-10);
  EXPECT_LT(q->norm(), 1.0 - 1e-9);
}

TEST(FixedPoint, NonCentralFixedPoint) {
  // phi_a o (z/2) o phi_a fixes a.
  const ComplexVec a = vec({Complex(0.3, -0.2), 0.25});
  HoloMap m = HoloMap::chain({HoloMap::automorphism(a), diag({0.5, 0.5}), HoloMap::automorphism(a)});
  auto p = find_interior_fixed_point(m);
  ASSERT_TRUE(p);
  EXPECT_LT((*p - a).norm(), 1e-9);
  HoloMap psi = conjugate_to_origin(m, *p);
  EXPECT_LT(psi(ComplexVec::Zero(2)).norm(), 1e-8);
  const ComplexVec z = vec({0.1, Complex(0, 0.4)});
  EXPECT_LT((psi(z) - 0.5 * z).norm(), 1e-9);
}

TEST(FixedPoint, ConjugateAtOrigin) {
  HoloMap sq = poly1({0.0, 0.0, 1.0});
  HoloMap psi = conjugate_to_origin(sq, vec({0.0}));
  EXPECT_LT(std::abs(psi(vec({0.3}))[0] - 0.09), 1e-15);
  EXPECT_THROW(conjugate_to_origin(hyperbolic(), vec({0.0})), DomainError);
  EXPECT_THROW(conjugate_to_origin(sq, vec({0.5})), DomainError);
}

TEST(Retraction, HalfMap) {
  auto est = estimate_retraction(diag({0.5}));
  ASSERT_TRUE(est.converged());
  EXPECT_EQ(est.k, 1);
  EXPECT_EQ(est.s, 1);
  EXPECT_LT(std::abs(est.rho(vec({0.9}))[0]), 1e-12);
  EXPECT_LT(verify_linear_retraction(est), 1e-12);
}

TEST(Retraction, SliceMap) {
  HoloMap m = diag({0.5, 1.0});
  auto est = estimate_retraction(m);
  ASSERT_TRUE(est.converged());
  EXPECT_EQ(est.k, 1);
  EXPECT_EQ(est.s, 1);
  const ComplexVec z = vec({Complex(0.3, 0.1), Complex(-0.2, 0.5)});
  EXPECT_LT((est.rho(z) - vec({0.0, z[1]})).norm(), 1e-12);
  EXPECT_LT(verify_linear_retraction(est), 1e-10);

  // Idempotency, commutation, and rho o phi_kj = rho.
  EXPECT_LT(sample_sup([&](const ComplexVec& w) { return (est.rho(est.rho(w)) - est.rho(w)).norm(); }, 2),
            1e-6);
  EXPECT_LT(sample_sup([&](const ComplexVec& w) { return (est.rho(m(w)) - m(est.rho(w))).norm(); }, 2),
            1e-6);
  HoloMap m7 = iterate_pointwise(m, 7);
  EXPECT_LT(sample_sup([&](const ComplexVec& w) { return (est.rho(m7(w)) - est.rho(w)).norm(); }, 2),
            1e-6);
}

TEST(Retraction, PolynomialSliceMap) {
  // (z1^2/2 + z1/4, z2) -> (0, z2)
  Polynomial a(2), b(2);
  a.add_term({2, 0}, 0.5);
  a.add_term({1, 0}, 0.25);
  b.add_term({0, 1}, 1.0);
  HoloMap m = HoloMap::power_series(2, {a, b});
  auto est = estimate_retraction(m);
  ASSERT_TRUE(est.converged());
  EXPECT_EQ(est.s, 1);
  EXPECT_LT(verify_linear_retraction(est), 1e-6);
  auto nf = normal_form(est, m);
  EXPECT_LT(nf.step1_residual, 1e-8);
  EXPECT_LT(nf.step3_residual, 1e-12);
}

TEST(Retraction, RotationHasPeriodThree) {
  HoloMap rot = HoloMap::linear(rotation(2.0 * std::numbers::pi / 3.0));
  auto est = estimate_retraction(rot);
  ASSERT_TRUE(est.converged());
  EXPECT_EQ(est.k, 3);
  EXPECT_EQ(est.s, 0);
  EXPECT_LT(std::abs(est.d0_rho(0, 0) - 1.0), 1e-12);
  auto nf = normal_form(est, rot);
  EXPECT_TRUE(nf.V.isApprox(ComplexMat::Identity(1, 1)));
  EXPECT_LT(nf.step3_residual, 1e-10);
}

TEST(Retraction, IrrationalRotationHasNoPeriod) {
  auto est = estimate_retraction(HoloMap::linear(rotation(1.0)));
  EXPECT_EQ(est.status, RetractionStatus::NoPeriodFound);
  EXPECT_FALSE(est.convergence_trace.empty());
  EXPECT_THROW(normal_form(est, HoloMap::linear(rotation(1.0))), std::invalid_argument);
}

TEST(Retraction, RequiresFixedOrigin) {
  EXPECT_THROW(estimate_retraction(poly1({0.5, 0.5})), DomainError);
}

TEST(Retraction, NonIdempotentLimitIsInconsistent) {
  // Accept after two doublings with a useless tolerance.
  RetractionOptions opt;
  opt.max_doublings = 2;
  opt.cauchy_tolerance = 10.0;
  opt.rho_extra_doublings = 0;
  opt.kmax = 1;
  // rho = phi_4 has eigenvalue 0.9^4 = 0.6561.
  EXPECT_THROW(estimate_retraction(diag({0.9, 1.0}), opt), InconsistencyError);
}

TEST(NormalForm, Examples) {
  {
    auto m = diag({0.5, 1.0});
    auto nf = normal_form(estimate_retraction(m), m);
    EXPECT_EQ(nf.s, 1);
    // Null space and range are already coordinate axes; V is I up to phases.
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(std::abs(nf.V(i, i)), 1.0, 1e-12);
    EXPECT_LT(std::abs(nf.V(0, 1)) + std::abs(nf.V(1, 0)), 1e-12);
    EXPECT_LT(nf.step1_residual, 1e-10);
    EXPECT_LT(nf.step2_residual, 1e-10);
    EXPECT_LT(nf.step3_residual, 1e-10);
    ASSERT_GE(nf.block_trace.size(), 2u);
    EXPECT_GT(nf.block_trace.front().contracting_sup, nf.block_trace.back().contracting_sup);
  }
  {
    auto m = diag({0.5});
    auto nf = normal_form(estimate_retraction(m), m);
    EXPECT_EQ(nf.s, 1);
    EXPECT_EQ(nf.projection(0, 0), Complex(0.0));
    EXPECT_LT(nf.block_trace.back().contracting_sup, 1e-12);
  }
  {
    auto m = HoloMap::identity(3);
    auto nf = normal_form(estimate_retraction(m), m);
    EXPECT_EQ(nf.s, 0);
    EXPECT_TRUE(nf.V.isApprox(ComplexMat::Identity(3, 3)));
    EXPECT_TRUE(nf.projection.isApprox(ComplexMat::Identity(3, 3)));
  }
}

TEST(NormalForm, ConjugatedIdempotent) {
  // A = Q diag(0.3, -0.4i, 1) Q*
  std::mt19937_64 rng(11);
  const ComplexMat q = ballab::testing::random_unitary(rng, 3);
  ComplexMat d = ComplexMat::Zero(3, 3);
  d(0, 0) = 0.3;
  d(1, 1) = Complex(0, -0.4);
  d(2, 2) = 1.0;
  const HoloMap m = HoloMap::linear(q * d * q.adjoint());
  auto est = estimate_retraction(m);
  ASSERT_TRUE(est.converged());
  EXPECT_EQ(est.s, 2);
  auto nf = normal_form(est, m);
  EXPECT_LT(nf.step1_residual, 1e-8);
  EXPECT_LT(nf.step2_residual, 1e-6);
  EXPECT_LT(nf.step3_residual, 1e-6);
}

TEST(NormalForm, MismatchCarriesWorstSample) {
  // Claim a converged estimate whose rho is wrong for the map.
  auto m = diag({0.5, 1.0});
  auto est = estimate_retraction(m);
  est.rho = HoloMap::linear(ComplexMat::Identity(2, 2) * 0.5);
  try {
    normal_form(est, m);
    FAIL() << "expected mismatch";
  } catch (const NormalFormMismatch& e) {
    EXPECT_EQ(e.worst_sample.size(), 2);
  }
}

TEST(DenjoyWolff, Examples) {
  auto a = denjoy_wolff_estimate(poly1({0.5, 0.5}));
  EXPECT_LT(std::abs(a.point[0] - 1.0), 1e-6);
  EXPECT_LT(a.scatter, 1e-6);

  auto h = denjoy_wolff_estimate(hyperbolic());
  EXPECT_LT(std::abs(h.point[0] - 1.0), 1e-6);

  auto p = denjoy_wolff_estimate(affine_pair());
  EXPECT_LT((p.point - vec({1.0, 0.0})).norm(), 1e-6);
}

TEST(DenjoyWolff, DisagreeingSeedsAreReported) {
  EXPECT_THROW(denjoy_wolff_estimate(HoloMap::linear(rotation(1.0))), NoCommonLimit);
}
