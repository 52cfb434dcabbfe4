#include <cmath>
#include <cstdint>

#include "cpca/cauchy_pca.hpp"
#include "cpca/linalg.hpp"
#include "cpca/rng.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cpca;
using cpca::testutil::tiny_angle_degrees;

namespace {

// Direct re-evaluation of the direction update, written independently of the
// library loop so the two can disagree.
Vector fp_reference_unnormalized(const Matrix& x, const Vector& u, const CauchyParams& p) {
  Vector acc = Vector::Zero(x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double d = x.row(i).dot(u) - p.mu;
    acc += (d / (p.sigma * p.sigma + d * d)) * x.row(i).transpose();
  }
  return acc;
}

Matrix gaussian_sample(RngStream& s, Eigen::Index n, const Vector& axis_scales) {
  return s.normal_matrix(n, axis_scales.size()) * axis_scales.asDiagonal();
}

}  // namespace

TEST_CASE("fixed_point_update: axis data reproduce the axis") {
  Matrix x(2, 2);
  x << 1, 0, -1, 0;
  DataMatrix data = DataMatrix::validated(x);
  Vector u(2);
  u << 1, 0;
  for (double sigma : {0.3, 1.0, 7.0}) {
    UnitDirection next = fixed_point_update(data, u, {0.0, sigma});
    CHECK(next.coords()[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(next.coords()[1]) <= 1e-14);
  }
}

TEST_CASE("fixed_point_update: rows orthogonal to u vanish") {
  Matrix x(4, 2);
  x << 0, 1, 0, -1, 0, 2, 0, -2;
  Vector u(2);
  u << 1, 0;
  CHECK_THROWS_WITH_AS(fixed_point_update(DataMatrix::validated(x), u, {0.0, 1.0}),
                       doctest::Contains("ZERO_UPDATE"), CpcaError);
}

TEST_CASE("fixed_point_update: matches the duplicate-formula evaluation") {
  RngStream s(701);
  for (int k = 0; k < 40; ++k) {
    Matrix x = s.normal_matrix(15, 3);
    Vector u = s.normal_vector(3).normalized();
    CauchyParams params{2.0 * s.uniform01() - 1.0, 0.3 + 1.7 * s.uniform01()};
    UnitDirection got = fixed_point_update(DataMatrix::validated(x), u, params);
    Vector ref = fp_reference_unnormalized(x, u, params);
    UnitDirection want = UnitDirection::normalized(ref);
    CHECK((got.coords() - want.coords()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("fixed_point_update_weighted: unit weights match the plain update") {
  RngStream s(702);
  for (int k = 0; k < 25; ++k) {
    Matrix x = s.normal_matrix(12, 4);
    Vector u = s.normal_vector(4).normalized();
    CauchyParams params{0.2, 0.8};
    UnitDirection plain = fixed_point_update(DataMatrix::validated(x), u, params);
    Vector weighted = fixed_point_update_weighted(x, Vector::Ones(12), u, params);
    CHECK(tiny_angle_degrees(weighted, plain.coords()) <= 1e-10);
    CHECK(std::abs(weighted.norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("fit_cauchy_pca: rank-1 data recover the spanning direction") {
  RngStream s(703);
  Vector v = s.normal_vector(4).normalized();
  Vector coeffs(20);
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) coeffs[i] = 3.0 * s.normal();
  Matrix x = coeffs * v.transpose();
  CauchyPcaResult fit = fit_cauchy_pca(DataMatrix::validated(x), {});
  REQUIRE(fit.directions.size() == 1);
  CHECK(angle_degrees(fit.directions[0].coords(), v) <= 1e-6);
  CHECK(fit.converged[0]);
}

TEST_CASE("fit_cauchy_pca: sequential components are orthogonal") {
  RngStream s(704);
  Vector scales(4);
  scales << 3.0, 2.0, 1.2, 0.6;
  Matrix x = gaussian_sample(s, 80, scales);
  CauchyPcaConfig cfg;
  cfg.k = 3;
  CauchyPcaResult fit = fit_cauchy_pca(DataMatrix::validated(x), cfg);
  REQUIRE(fit.directions.size() == 3);
  REQUIRE(fit.params.size() == 3);
  REQUIRE(fit.iterations.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(fit.converged[i]);
    CHECK(fit.params[i].valid());
    for (int j = i + 1; j < 3; ++j) {
      CHECK(std::abs(fit.directions[i].coords().dot(fit.directions[j].coords())) <= 1e-8);
    }
  }
}

TEST_CASE("fit_cauchy_pca: tracks the classical direction on clean Gaussian data") {
  RngStream s(705);
  Vector scales(5);
  scales << std::sqrt(6.0), std::sqrt(4.0), std::sqrt(2.5), 1.0, std::sqrt(0.5);
  Matrix x = gaussian_sample(s, 200, scales);
  DataMatrix data = DataMatrix::validated(x);
  CauchyPcaResult fit = fit_cauchy_pca(data, {});
  LeadingEigen classical = classical_first_pc(data);
  CHECK(angle_degrees(fit.directions[0].coords(), classical.direction.coords()) <= 10.0);
}

TEST_CASE("fit_cauchy_pca: returned pairs are fixed points of the update") {
  RngStream s(706);
  Vector scales(4);
  scales << 2.5, 1.5, 0.9, 0.4;
  Matrix x = gaussian_sample(s, 60, scales);
  CauchyPcaConfig cfg;
  cfg.k = 2;
  CauchyPcaResult fit = fit_cauchy_pca(DataMatrix::validated(x), cfg);
  REQUIRE(fit.converged[0]);
  REQUIRE(fit.converged[1]);

  UnitDirection step1 =
      fixed_point_update(DataMatrix::validated(x), fit.directions[0].coords(), fit.params[0]);
  CHECK(angle_degrees(step1.coords(), fit.directions[0].coords()) <= cfg.outer_tol);

  Matrix deflated = deflate(x, fit.directions[0].coords());
  UnitDirection step2 = fixed_point_update(DataMatrix::validated(deflated),
                                           fit.directions[1].coords(), fit.params[1]);
  CHECK(angle_degrees(step2.coords(), fit.directions[1].coords()) <= cfg.outer_tol);
}

TEST_CASE("fit_cauchy_pca: profile objective at the result undercuts random directions") {
  RngStream s(707);
  SUBCASE("clean gaussian") {
    Vector scales(4);
    scales << 2.2, 1.4, 0.8, 0.5;
    Matrix x = gaussian_sample(s, 60, scales);
    DataMatrix data = DataMatrix::validated(x);
    CauchyPcaResult fit = fit_cauchy_pca(data, {});
    double at_result = cauchy_profile_loglik(data, fit.directions[0].coords());
    RngStream probes(708);
    for (int k = 0; k < 50; ++k) {
      Vector dir = probes.normal_vector(4).normalized();
      CHECK(at_result <= cauchy_profile_loglik(data, dir) + 1e-6);
    }
  }
  SUBCASE("mildly contaminated gaussian") {
    Vector scales(3);
    scales << 2.0, 1.1, 0.6;
    Matrix x = gaussian_sample(s, 50, scales);
    x.row(49) = Vector::Constant(3, 8.0).transpose();
    DataMatrix data = DataMatrix::validated(x);
    CauchyPcaResult fit = fit_cauchy_pca(data, {});
    double at_result = cauchy_profile_loglik(data, fit.directions[0].coords());
    RngStream probes(709);
    for (int k = 0; k < 50; ++k) {
      Vector dir = probes.normal_vector(3).normalized();
      CHECK(at_result <= cauchy_profile_loglik(data, dir) + 1e-6);
    }
  }
}

TEST_CASE("fit_cauchy_pca: rotation equivariance") {
  RngStream s(710);
  for (int k = 0; k < 25; ++k) {
    Vector scales(3);
    scales << 2.6, 1.3, 0.7;
    Matrix x = gaussian_sample(s, 30, scales);
    Matrix r = orthonormal_basis(4000 + static_cast<std::uint64_t>(k), 3);
    CauchyPcaResult plain = fit_cauchy_pca(DataMatrix::validated(x), {});
    CauchyPcaResult rotated = fit_cauchy_pca(DataMatrix::validated(Matrix(x * r)), {});
    Vector mapped = r.transpose() * plain.directions[0].coords();
    CHECK(angle_degrees(rotated.directions[0].coords(), mapped) <= 1e-4);
  }
}

TEST_CASE("fit_cauchy_pca: provided and random inits reach the same optimum") {
  RngStream s(711);
  Vector scales(3);
  scales << 3.0, 1.5, 0.8;
  Matrix x = gaussian_sample(s, 70, scales);
  DataMatrix data = DataMatrix::validated(x);
  CauchyPcaResult classic = fit_cauchy_pca(data, {});

  CauchyPcaConfig provided;
  provided.init_mode = InitMode::kProvided;
  provided.initial_directions = {s.normal_vector(3).normalized()};
  CauchyPcaResult from_provided = fit_cauchy_pca(data, provided);
  CHECK(angle_degrees(from_provided.directions[0].coords(),
                      classic.directions[0].coords()) <= 1e-3);

  CauchyPcaConfig random_init;
  random_init.init_mode = InitMode::kRandom;
  random_init.seed = 99;
  CauchyPcaResult from_random = fit_cauchy_pca(data, random_init);
  CHECK(angle_degrees(from_random.directions[0].coords(),
                      classic.directions[0].coords()) <= 1e-3);
}

TEST_CASE("fit_cauchy_pca: configuration and input validation") {
  RngStream s(712);
  Matrix x = s.normal_matrix(10, 3);
  DataMatrix data = DataMatrix::validated(x);

  CauchyPcaConfig bad;
  bad.k = 0;
  CHECK_THROWS_AS(fit_cauchy_pca(data, bad), std::invalid_argument);
  bad.k = 4;
  CHECK_THROWS_AS(fit_cauchy_pca(data, bad), std::invalid_argument);
  bad.k = 1;
  bad.outer_tol = 0.0;
  CHECK_THROWS_AS(fit_cauchy_pca(data, bad), std::invalid_argument);
  bad.outer_tol = 1e-6;
  bad.max_outer_iters = 0;
  CHECK_THROWS_AS(fit_cauchy_pca(data, bad), std::invalid_argument);

  CauchyPcaConfig missing;
  missing.init_mode = InitMode::kProvided;
  CHECK_THROWS_AS(fit_cauchy_pca(data, missing), std::invalid_argument);

  Matrix two_rows = s.normal_matrix(2, 3);
  CHECK_THROWS_WITH_AS(fit_cauchy_pca(DataMatrix::validated(two_rows), {}),
                       doctest::Contains("DEGENERATE_SAMPLE"), CpcaError);
}

TEST_CASE("fit_cauchy_pca: rank exhaustion names the failing component") {
  RngStream s(713);
  Vector v = s.normal_vector(3).normalized();
  Vector coeffs = s.normal_vector(25);
  Matrix x = coeffs * v.transpose();
  CauchyPcaConfig cfg;
  cfg.k = 2;
  CHECK_THROWS_WITH_AS(fit_cauchy_pca(DataMatrix::validated(x), cfg),
                       doctest::Contains("component 2"), CpcaError);
}

TEST_CASE("fit_cauchy_pca: iteration cap sets the flag instead of throwing") {
  RngStream s(714);
  Matrix x = s.normal_matrix(40, 3);
  CauchyPcaConfig cfg;
  cfg.max_outer_iters = 1;
  cfg.init_mode = InitMode::kRandom;
  cfg.seed = 5;
  CauchyPcaResult fit = fit_cauchy_pca(DataMatrix::validated(x), cfg);
  CHECK(fit.iterations[0] == 1);
  CHECK_FALSE(fit.converged[0]);
}

TEST_CASE("gaussian_pca_equivalence_check: axis-aligned example") {
  Matrix x(4, 2);
  x << 2, 0, -2, 0, 0, 1, 0, -1;
  EquivalenceCheck check = gaussian_pca_equivalence_check(DataMatrix::validated(x));
  CHECK(check.angle <= 1e-10);
  CHECK(check.variance_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(check.degenerate);
}

TEST_CASE("gaussian_pca_equivalence_check: grid argmin tracks the covariance argmax") {
  RngStream s(715);
  int tested = 0;
  for (int k = 0; tested < 8 && k < 40; ++k) {
    double ratio = 1.3 + 1.5 * s.uniform01();
    Matrix x = s.normal_matrix(20 + 4 * k % 30, 2);
    x.col(0) *= ratio;
    Matrix rot = orthonormal_basis(6000 + static_cast<std::uint64_t>(k), 2);
    x = x * rot;
    auto [cov, xbar] = sample_covariance(x);
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    double gap = (es.eigenvalues()[1] - es.eigenvalues()[0]) / es.eigenvalues()[1];
    if (gap <= 1e-3) continue;
    EquivalenceCheck check = gaussian_pca_equivalence_check(DataMatrix::validated(x));
    CHECK(check.angle <= 0.5);
    CHECK(check.variance_ratio <= 1.0 + 1e-12);
    CHECK(check.variance_ratio >= 0.99);
    CHECK_FALSE(check.degenerate);
    ++tested;
  }
  CHECK(tested == 8);
}

TEST_CASE("gaussian_pca_equivalence_check: tied eigenvalues raise the degenerate flag") {
  Matrix x(4, 2);
  x << 1, 1, 1, -1, -1, 1, -1, -1;
  EquivalenceCheck check = gaussian_pca_equivalence_check(DataMatrix::validated(x));
  CHECK(check.degenerate);
}

TEST_CASE("gaussian_pca_equivalence_check: dimension guard and 1-D case") {
  RngStream s(716);
  Matrix wide = s.normal_matrix(10, 4);
  CHECK_THROWS_WITH_AS(gaussian_pca_equivalence_check(DataMatrix::validated(wide)),
                       doctest::Contains("UNSUPPORTED_DIMENSION"), CpcaError);
  Matrix narrow = s.normal_matrix(10, 1);
  EquivalenceCheck check = gaussian_pca_equivalence_check(DataMatrix::validated(narrow));
  CHECK(check.angle == 0.0);
  CHECK(check.variance_ratio == 1.0);
}
