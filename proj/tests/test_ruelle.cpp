#include <catch2/catch_amalgamated.hpp>

#include "kacbaker/model.hpp"
#include "kacbaker/ruelle.hpp"
#include "support/oracles.hpp"

using namespace kacbaker;
using Catch::Approx;
using oracles::cplx;

TEST_CASE("ruelle matrix: corner entry and parity pattern") {
  for (Beta beta : {Beta(0.0), Beta(1.7), Beta(-2.2), Beta(0.3, 1.1)}) {
    const auto m = ruelle_matrix(beta, 12, ModelParams(0.45));
    CHECK(std::abs(m.entries(0, 0) - 2.0) < 1e-14);
    for (int r = 0; r < 12; ++r)
      for (int c = 0; c < 12; ++c)
        if ((r + c) % 2 == 1) CHECK(m.entries(r, c) == cplx(0.0, 0.0));
  }
}

TEST_CASE("ruelle matrix: beta = 0 is triangular with binomial entries") {
  const double lambda = 0.4;
  const auto m = ruelle_matrix(0.0, 12, ModelParams(lambda));
  for (int r = 0; r < 12; ++r) {
    for (int c = 0; c < 12; ++c) {
      if ((r + c) % 2 == 1) continue;
      double expected = 0.0;
      if (r <= c) {
        double binom = 1.0;  // C(c, r)
        for (int i = 0; i < r; ++i) binom = binom * (c - i) / (i + 1);
        expected = 2.0 * std::pow(lambda, c) * binom;
      }
      CHECK(std::abs(m.entries(r, c) - expected) <= 1e-13 * std::max(1.0, expected));
    }
  }
}

TEST_CASE("ruelle matrix: columns match Taylor coefficients of the action") {
  // Column k of the matrix must reproduce the Taylor coefficients of
  // L(z^k), extracted independently by a contour integral of radius 1/2.
  struct Case {
    double lambda;
    Beta beta;
  };
  for (const auto& c : {Case{0.5, Beta(0.7)}, Case{0.3, Beta(-1.1)}, Case{0.6, Beta(0.4, 0.8)}}) {
    const ModelParams params(c.lambda);
    const int N = 14;
    const auto m = ruelle_matrix(c.beta, N, params);
    for (int k = 0; k < N; k += 3) {
      auto image = [&](cplx z) {
        return apply_ruelle_pointwise(c.beta, [k](cplx w) { return std::pow(w, k); }, z, params);
      };
      for (int r = 0; r < N; ++r) {
        const cplx coeff = oracles::taylor_coefficient(image, r, 0.5);
        CHECK(std::abs(m.entries(r, k) - coeff) < 1e-9);
      }
    }
  }
}

TEST_CASE("pointwise action: closed-form images") {
  const ModelParams params(0.5);

  // Constant function: L 1 = e^{beta z} + e^{-beta z} = 2 cosh(beta z).
  for (cplx z : {cplx(0.3), cplx(-0.8, 0.4), cplx(0.0, 1.0)}) {
    const cplx got = apply_ruelle_pointwise(1.3, [](cplx) { return cplx(1.0); }, z, params);
    CHECK(std::abs(got - 2.0 * std::cosh(1.3 * z)) < 1e-13);
  }

  // beta = 0, f = z: image 2 lambda z.
  const ModelParams p4(0.4);
  const cplx got = apply_ruelle_pointwise(0.0, [](cplx w) { return w; }, cplx(0.7), p4);
  CHECK(std::abs(got - cplx(2.0 * 0.4 * 0.7)) < 1e-15);

  // lambda = 1/2: sinh(2 beta z) is an eigenfunction with eigenvalue e^beta.
  const double beta = 0.9;
  for (cplx z : {cplx(0.2), cplx(-0.5, 0.3), cplx(0.1, -0.7)}) {
    const cplx image =
        apply_ruelle_pointwise(beta, [beta](cplx w) { return std::sinh(2.0 * beta * w); }, z, params);
    const cplx expected = std::exp(beta) * std::sinh(2.0 * beta * z);
    CHECK(std::abs(image - expected) <= 1e-12 * std::abs(expected));
  }
}

TEST_CASE("parity blocks restrict the full matrix") {
  const ModelParams params(0.5);
  const int N = 21;
  const auto pair = parity_matrices(1.2, N, params);
  const auto full = ruelle_matrix(1.2, N, params);
  CHECK(pair.even.dim == 11);
  CHECK(pair.odd.dim == 10);
  for (int i = 0; i < pair.even.dim; ++i)
    for (int j = 0; j < pair.even.dim; ++j)
      CHECK(pair.even.entries(i, j) == full.entries(2 * i, 2 * j));
  for (int i = 0; i < pair.odd.dim; ++i)
    for (int j = 0; j < pair.odd.dim; ++j)
      CHECK(pair.odd.entries(i, j) == full.entries(2 * i + 1, 2 * j + 1));

  // At beta = 0 the blocks are triangular with the split geometric diagonal.
  const auto zero = parity_matrices(0.0, 12, params);
  for (int j = 0; j < zero.even.dim; ++j)
    CHECK(std::abs(zero.even.entries(j, j) - 2.0 * std::pow(0.5, 2 * j)) < 1e-15);
  for (int j = 0; j < zero.odd.dim; ++j)
    CHECK(std::abs(zero.odd.entries(j, j) - 2.0 * std::pow(0.5, 2 * j + 1)) < 1e-15);
}

TEST_CASE("matrix traces against exact lattice traces") {
  // n = 1 at beta = 0: trace = sum 2 lambda^k -> 2/(1-lambda).
  const ModelParams params(0.5);
  const auto m0 = ruelle_matrix(0.0, 60, params);
  CHECK(std::abs(truncated_trace_power(m0, 1) - cplx(4.0)) < 1e-12);

  // n = 1, lambda = 1/2, beta = 1: exact trace Z_1/(1-lambda) = 4e.
  const auto m1 = ruelle_matrix(1.0, 60, params);
  CHECK(std::abs(truncated_trace_power(m1, 1) - cplx(4.0 * std::exp(1.0))) <=
        1e-10 * 4.0 * std::exp(1.0));

  // n = 3, lambda = 0.3, beta = 0.7: (1 - lambda^3) tr(L^3) = Z_3.
  const ModelParams p3(0.3);
  const auto m3 = ruelle_matrix(0.7, 60, p3);
  const cplx z3 = partition_function_exact(3, 0.7, p3);
  const cplx lhs = (1.0 - std::pow(0.3, 3)) * truncated_trace_power(m3, 3);
  CHECK(std::abs(lhs - z3) <= 1e-9 * std::abs(z3));

  // Doubling the section dimension tightens the n = 1 trace.
  const ModelParams ph(0.5);
  const cplx exact = exact_trace_ruelle_power(1, 1.0, ph);
  const cplx t30 = truncated_trace_power(ruelle_matrix(1.0, 30, ph), 1);
  const cplx t60 = truncated_trace_power(ruelle_matrix(1.0, 60, ph), 1);
  CHECK(std::abs(t60 - exact) < std::abs(t30 - exact));
  CHECK(std::abs(t60 - exact) <= 1e-10 * std::abs(exact));
}

TEST_CASE("conjugating beta conjugates the matrix") {
  const ModelParams params(0.45);
  const Beta beta(-0.6, 1.9);
  const auto m = ruelle_matrix(beta, 16, params);
  const auto mc = ruelle_matrix(std::conj(beta), 16, params);
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c)
      CHECK(std::abs(mc.entries(r, c) - std::conj(m.entries(r, c))) <=
            1e-15 * std::abs(m.entries(r, c)));
}

TEST_CASE("sinh coefficient vector is an eigenvector of the section") {
  // lambda = 1/2: coefficients of sinh(2 beta z) i.e. (2 beta)^m / m! for odd
  // m; the section must reproduce e^beta times the vector on low coefficients.
  const ModelParams params(0.5);
  const double beta = 1.3;
  const int N = 60;
  const auto m = ruelle_matrix(beta, N, params);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(N);
  for (int j = 1; j < N; j += 2)
    v(j) = std::exp(j * std::log(2.0 * beta) - log_factorial(j));
  const Eigen::VectorXcd w = m.entries * v;
  const Eigen::VectorXcd expected = std::exp(beta) * v;
  const double scale = expected.cwiseAbs().maxCoeff();
  for (int j = 0; j < N - 10; ++j)
    CHECK(std::abs(w(j) - expected(j)) <= 1e-8 * scale);
}

TEST_CASE("ruelle matrix: argument checks") {
  const ModelParams params(0.5);
  CHECK_THROWS_AS(ruelle_matrix(1.0, 0, params), std::domain_error);
  CHECK_THROWS_AS(ruelle_matrix(1.0, 4096, params), resource_limit_error);
  CHECK_THROWS_AS(ruelle_matrix(Beta(std::numeric_limits<double>::quiet_NaN(), 0.0), 8, params),
                  std::domain_error);
  const auto m = ruelle_matrix(1.0, 8, params);
  CHECK_THROWS_AS(truncated_trace_power(m, 0), std::domain_error);
  CHECK_THROWS_AS(truncated_trace_power(m, 65), resource_limit_error);
}
