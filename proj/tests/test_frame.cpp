#include <catch2/catch_amalgamated.hpp>

#include <blaschke/frame.hpp>

#include "oracles.hpp"

using namespace blaschke;

TEST_CASE("toy diagonal cubic form: maximizer found and matches brute force") {
  Tensor3<double> C(2);
  C(0, 0, 0) = 2;
  C(1, 1, 1) = 1;
  DMat<double> h(2, 2);
  h(0, 0) = h(1, 1) = 1;

  auto r = maximize_cubic(C, h, {{1, 0}, {0, 1}});
  CHECK(r.converged);
  CHECK(r.value == Catch::Approx(2.0).margin(1e-10));
  CHECK(std::fabs(r.direction[0]) == Catch::Approx(1.0).margin(1e-8));
  CHECK(r.stationarity < 1e-7);

  auto f = [&](const std::vector<double>& v) {
    double s = 0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) s += C(i, j, k) * v[i] * v[j] * v[k];
    return s;
  };
  CHECK(std::fabs(oracles::sphere_grid_max(f, 2) - r.value) < 1e-4);
}

TEST_CASE("vanishing cubic form is flagged, not solved") {
  Tensor3<double> C(3);
  DMat<double> h(3, 3);
  for (int i = 0; i < 3; ++i) h(i, i) = 1;
  auto r = maximize_cubic(C, h, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  CHECK(r.vanishing);
  CHECK(r.value == 0.0);
}

TEST_CASE("dense symmetric tensor on a 3-sphere matches the grid search") {
  std::mt19937_64 rng(321);
  Tensor3<double> C(3);
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j)
      for (int k = j; k < 3; ++k) {
        double v = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
        C(i, j, k) = C(i, k, j) = C(j, i, k) = C(j, k, i) = C(k, i, j) =
            C(k, j, i) = v;
      }
  DMat<double> h(3, 3);
  for (int i = 0; i < 3; ++i) h(i, i) = 1;
  auto r = maximize_cubic(C, h, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  auto f = [&](const std::vector<double>& v) {
    double s = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) s += C(i, j, k) * v[i] * v[j] * v[k];
    return s;
  };
  double bf = oracles::sphere_grid_max(f, 3);
  CHECK(r.value >= bf - 1e-4);
  CHECK(r.value <= bf + 1e-4);
}

TEST_CASE("maximizer value is gauge invariant") {
  auto chart = make_chart(ChartSpec::calabi(2, 2));
  std::vector<double> u = {0.4, -0.2, 0.6, 1.2};
  auto b = full_invariants<double>(chart, u);
  std::vector<std::vector<double>> E = {{1, 0, 0, 0}, {0, 1, 0, 0}};

  auto base = maximize_cubic(b.cubic, b.metric.h, E);
  std::mt19937_64 rng(55);
  double lo = base.value, hi = base.value;
  for (int t = 0; t < 5; ++t) {
    // random rotation of the spanning set leaves the subspace unchanged
    double th = 2 * M_PI * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    std::vector<std::vector<double>> E2 = {
        {std::cos(th), std::sin(th), 0, 0}, {-std::sin(th), std::cos(th), 0, 0}};
    FrameConfig fc;
    fc.seed = 1000 + t;
    auto r = maximize_cubic(b.cubic, b.metric.h, E2, fc);
    lo = std::min(lo, r.value);
    hi = std::max(hi, r.value);
  }
  CHECK(hi - lo < 1e-8);
}

TEST_CASE("split frame reproduces the ladder on calabi(2,2)") {
  auto chart = make_chart(ChartSpec::calabi(2, 2));
  std::vector<double> u = {0.1, -0.3, 0.7, 0.9};
  auto b = full_invariants<double>(chart, u);
  auto fr = split_frame(b, *chart.blocks);
  const double H = b.mean_curvature;
  const int n = 4;

  REQUIRE(fr.lambdas.size() == 2);
  CHECK(!fr.vanishing_cubic);
  CHECK(fr.gram_residual < 1e-9);
  CHECK(fr.stationarity_residual < 1e-7);
  CHECK(fr.isotropy_residual < 1e-7);
  CHECK(fr.second_factor_residual < 1e-7);
  CHECK(fr.canonical_form_residual < 1e-7);

  const double lam1 = (n - 1) * std::sqrt(-H / n);
  CHECK(std::fabs(fr.lambdas[0] - lam1) < 1e-6 * lam1);
  CHECK(std::fabs(fr.lambdas[0] + (n - 1) * fr.mus[0]) < 1e-6);
  CHECK(std::fabs(fr.lambdas[1] + (n - 2) * fr.mus[1]) < 1e-6);
  CHECK(fr.lambdas[0] > 0);
  CHECK(fr.lambdas[1] >= 0);

  double smu = fr.mus[0] * fr.mus[0] + fr.mus[1] * fr.mus[1];
  CHECK(std::fabs(smu + 2 * H / 3) < 1e-6 * std::fabs(H));

  SECTION("levels match brute force (dims 2 and 1)") {
    // level 1: the flat 2-plane; reduce to the h-orthonormal basis first
    auto E = detail::h_orthonormalize(b.metric.h, {{1, 0, 0, 0}, {0, 1, 0, 0}});
    auto f2 = [&](const std::vector<double>& v) {
      std::vector<double> w(4, 0.0);
      for (int a = 0; a < 2; ++a)
        for (int i = 0; i < 4; ++i) w[i] += v[a] * E[a][i];
      return detail::cubic_eval(b.cubic, w, w, w);
    };
    CHECK(std::fabs(oracles::sphere_grid_max(f2, 2) - fr.lambdas[0]) < 1e-4);
  }
}

TEST_CASE("split frame on thm12 gives the two-eigenvalue structure") {
  for (int n : {3, 4}) {
    auto chart = make_chart(ChartSpec::thm12(n));
    std::vector<double> u(n, 0.5);
    u[1] = 0.8;
    auto b = full_invariants<double>(chart, u);
    auto fr = split_frame(b, *chart.blocks);
    const double H = b.mean_curvature;
    const double mu = -std::sqrt(-H / n);
    INFO("thm12(" << n << ")");
    REQUIRE(fr.lambdas.size() == 1);
    CHECK(std::fabs(fr.lambdas[0] - (n - 1) * std::sqrt(-H / n)) < 1e-6);
    CHECK(std::fabs(fr.mus[0] - mu) < 1e-6);
    CHECK(fr.canonical_form_residual < 1e-7);
    CHECK(fr.second_factor_residual < 1e-7);
  }
}

TEST_CASE("split frame preconditions") {
  auto chart = make_chart(ChartSpec::calabi(2, 2));
  std::vector<double> u = {0.0, 0.0, 0.5, 1.0};
  auto b = full_invariants<double>(chart, u);

  SECTION("bad block partition") {
    Blocks bad;
    bad.first = {0};
    bad.second = {1, 2};
    CHECK_THROWS_AS(split_frame(b, bad), ComputeError);
  }
  SECTION("non-affine-sphere data is rejected") {
    auto spoiled = b;
    spoiled.shape(0, 1) += 0.2;
    CHECK_THROWS_AS(split_frame(spoiled, *chart.blocks), ComputeError);
  }
}

TEST_CASE("non-convergence is reported, not fatal") {
  auto chart = make_chart(ChartSpec::calabi(2, 2));
  std::vector<double> u = {0.1, -0.3, 0.7, 0.9};
  auto b = full_invariants<double>(chart, u);
  FrameConfig starved;
  starved.max_iter = 1;
  starved.step_tol = 0.0;
  auto r = maximize_cubic(b.cubic, b.metric.h, {{1, 0, 0, 0}, {0, 1, 0, 0}}, starved);
  CHECK(!r.converged);
  CHECK(r.iterations <= 1);
}

TEST_CASE("parallelism across displaced points") {
  SECTION("q1n(3) along a coordinate curve") {
    auto chart = make_chart(ChartSpec::q1n(3));
    std::vector<BlaschkeData<double>> datas;
    for (int k = 0; k < 10; ++k) {
      std::vector<double> u = {-0.9 + 0.2 * k, 0.1, -0.2};
      datas.push_back(full_invariants<double>(chart, u));
    }
    auto rep = verify_parallelism(datas);
    CHECK(rep.max_nabla_k < 1e-7);
  }
  SECTION("calabi(2,2): parallel K and constant ladder") {
    auto chart = make_chart(ChartSpec::calabi(2, 2));
    std::vector<BlaschkeData<double>> datas;
    std::vector<FrameResult> frames;
    for (int k = 0; k < 10; ++k) {
      std::vector<double> u = {-0.8 + 0.17 * k, 0.2, 0.5 + 0.09 * k, 1.0};
      datas.push_back(full_invariants<double>(chart, u));
      frames.push_back(split_frame(datas.back(), *chart.blocks));
    }
    auto rep = verify_parallelism(datas, frames);
    CHECK(rep.max_nabla_k < 1e-7);
    CHECK(rep.has_ladder);
    CHECK(rep.lambda_spread < 1e-6);
    CHECK(rep.mu_spread < 1e-6);
  }
  SECTION("paraboloid: exactly zero") {
    auto chart = make_chart(ChartSpec::paraboloid(3));
    std::vector<BlaschkeData<double>> datas;
    for (int k = 0; k < 3; ++k) {
      std::vector<Rational> u = {Rational(k, 4), Rational(-k, 5), Rational(1, 2)};
      datas.push_back(to_double_data(full_invariants<Rational>(chart, u)));
    }
    auto rep = verify_parallelism(datas);
    CHECK(rep.max_nabla_k == 0.0);
  }
}
