#include <cmath>
#include <limits>

#include <doctest.h>

#include "gen.hpp"
#include "oracle.hpp"
#include "sicae/error.hpp"
#include "sicae/model.hpp"

using namespace sicae;

TEST_CASE("force of infection examples") {
  const ModelParams p;
  CHECK(force_of_infection({10000, 0, 0, 0, 0}, p) == 0.0);
  CHECK(force_of_infection({10000, 200, 0, 0, 0}, p) == doctest::Approx(0.582 * 200 / 10200.0).epsilon(1e-12));
  CHECK(force_of_infection({10000, 200, 0, 0, 0}, p) == doctest::Approx(0.0114118).epsilon(1e-5));
  CHECK(force_of_infection({10000, 0, 100, 0, 0}, p) == doctest::Approx(2.2824e-4).epsilon(1e-4));
  CHECK(force_of_infection({10000, 0, 0, 10, 0}, p) == doctest::Approx(0.582 * 1.35 * 10 / 10200.0));
}

TEST_CASE("force of infection clamps round-off negatives and rejects non-finite input") {
  const ModelParams p;
  CHECK(force_of_infection({10000, -1e-12, 0, 0, 0}, p) == 0.0);
  CHECK_THROWS_AS(force_of_infection({10000, std::nan(""), 0, 0, 0}, p), InvalidInput);
  CHECK_THROWS_AS(force_of_infection({10000, 0, std::numeric_limits<double>::infinity(), 0, 0}, p), InvalidInput);
}

TEST_CASE("force of infection uses the instantaneous total when asked") {
  ModelParams p;
  p.instantaneous_population = true;
  CHECK(force_of_infection({4900, 100, 0, 0, 0}, p) == doctest::Approx(0.582 * 100 / 5000.0));
}

TEST_CASE("derivative at the reference initial state matches an independent evaluation") {
  const ModelParams p;
  const Compartments d = derivative(reference_initial_state(), 0.0, p);
  const auto o = oracle::rhs({10000, 200, 0, 0, 0}, 0.0);
  CHECK(d.S == doctest::Approx(-111.24).epsilon(1e-4));
  CHECK(d.I == doctest::Approx(-108.76).epsilon(1e-4));
  CHECK(d.C == doctest::Approx(200.0));
  CHECK(d.A == doctest::Approx(20.0));
  CHECK(d.E == 0.0);
  const auto a = d.as_array();
  for (int i = 0; i < 5; ++i) CHECK(a[i] == doctest::Approx(o[i]).epsilon(1e-13));
}

TEST_CASE("disease-free equilibrium is stationary") {
  const Compartments d = derivative({10200, 0, 0, 0, 0}, 0.0, ModelParams{});
  CHECK(std::abs(d.S) < 1e-12);
  CHECK(d.I == 0.0);
  CHECK(d.C == 0.0);
  CHECK(d.A == 0.0);
  CHECK(d.E == 0.0);
}

TEST_CASE("derivative rejects controls outside [0,1]") {
  const ModelParams p;
  CHECK_THROWS_AS(derivative(reference_initial_state(), -1e-9, p), ContractViolation);
  CHECK_THROWS_AS(derivative(reference_initial_state(), 1.0 + 1e-9, p), ContractViolation);
  CHECK_NOTHROW(derivative(reference_initial_state(), 1.0, p));
}

TEST_CASE("property: derivative sum is mu (N - total) for arbitrary states and controls") {
  const ModelParams p;
  gen::Source g(11);
  for (int c = 0; c < 2000; ++c) {
    CAPTURE(c);
    const double total = g.uniform(0.0, 20000.0);
    const Compartments x = g.state_with_total(total);
    const double u = g.uniform(0.0, 1.0);
    const Compartments d = derivative(x, u, p);
    const double scale = std::abs(d.S) + std::abs(d.I) + std::abs(d.C) + std::abs(d.A) + std::abs(d.E) + 1.0;
    CHECK(std::abs(d.total() - p.mu * (p.N - x.total())) <= 1e-12 * scale);
  }
}

TEST_CASE("property: conservation at total N") {
  const ModelParams p;
  gen::Source g(12);
  for (int c = 0; c < 2000; ++c) {
    CAPTURE(c);
    const Compartments x = g.state_with_total(p.N);
    const Compartments d = derivative(x, g.uniform(0.0, 1.0), p);
    const double scale = std::abs(d.S) + std::abs(d.I) + std::abs(d.C) + std::abs(d.A) + std::abs(d.E) + 1.0;
    CHECK(std::abs(d.total()) <= 1e-12 * scale);
  }
}

TEST_CASE("property: force of infection is homogeneous in (I, C, A)") {
  const ModelParams p;
  gen::Source g(13);
  for (int c = 0; c < 2000; ++c) {
    CAPTURE(c);
    const Compartments x{g.uniform(0, 1e4), g.uniform(0, 1e3), g.uniform(0, 1e3), g.uniform(0, 1e3), 0.0};
    const double k = g.uniform(0.0, 10.0);
    const Compartments scaled{x.S, k * x.I, k * x.C, k * x.A, x.E};
    CHECK(force_of_infection(scaled, p) == doctest::Approx(k * force_of_infection(x, p)).epsilon(1e-12));
    CHECK(force_of_infection(x, p) >= 0.0);
  }
}

TEST_CASE("parameter validation") {
  ModelParams p;
  CHECK_NOTHROW(p.validate());
  CHECK(p.constant_population());
  p.beta = -0.1;
  CHECK_THROWS_AS(p.validate(), InvalidInput);
  p = {};
  p.eta_A = 0.5;
  CHECK_THROWS_AS(p.validate(), InvalidInput);
  p = {};
  p.eta_C = 1.5;
  CHECK_THROWS_AS(p.validate(), InvalidInput);
  p = {};
  p.N = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidInput);
  p = {};
  p.d = 0.01;
  CHECK_FALSE(p.constant_population());
}
