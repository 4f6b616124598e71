#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "kacbaker/kacg.hpp"
#include "kacbaker/model.hpp"
#include "kacbaker/ruelle.hpp"
#include "support/oracles.hpp"

using kacbaker::Beta;
using kacbaker::ModelParams;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
namespace kb = kacbaker;

TEST_CASE("mehler series matches both closed forms") {
  // Worked value at the origin: the Gaussian form reduces to sqrt(2/(1-l^2)).
  {
    const double lambda = 0.5;
    const int terms = kb::mehler_adaptive_terms(lambda, 0.0, 0.0);
    const auto sides = kb::mehler_sides(lambda, 0.0, 0.0, terms);
    CHECK_THAT(sides.rhs, WithinRel(std::sqrt(2.0 / 0.75), 1e-15));
    CHECK_THAT(sides.lhs, WithinAbs(sides.rhs, 1e-12));
  }

  for (double lambda : {0.2, 0.5, 0.8}) {
    double worst_series = 0.0;
    double worst_rewrite = 0.0;
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        const double x = -2.0 + i;
        const double y = -2.0 + j;
        const int terms = kb::mehler_adaptive_terms(lambda, x, y);
        const auto sides = kb::mehler_sides(lambda, x, y, terms);
        worst_series = std::max(worst_series, std::abs(sides.lhs - sides.rhs));
        worst_rewrite = std::max(worst_rewrite, std::abs(sides.rhs - sides.rhs_hyperbolic));
      }
    }
    INFO("lambda = " << lambda);
    CHECK(worst_series < 1e-10);
    CHECK(worst_rewrite < 1e-13);
  }
}

TEST_CASE("mehler argument validation") {
  CHECK_THROWS_AS(kb::mehler_sides(0.5, 0.0, 0.0, 0), std::domain_error);
  CHECK_THROWS_AS(kb::mehler_sides(1.2, 0.0, 0.0, 10), std::domain_error);
  CHECK_THROWS_AS(kb::mehler_sides(0.5, 0.0, 0.0, 200001), kb::resource_limit_error);
}

TEST_CASE("kernel symmetry and the beta = 0 reduction") {
  const ModelParams params(0.4);
  CHECK(kb::ktilde_kernel(0.7, -1.3, params) == kb::ktilde_kernel(-1.3, 0.7, params));

  // At beta = 0 the cosh prefactor is 1, so the full kernel is the Gaussian
  // one rescaled by e^{-gamma/2}/sqrt(pi).
  for (double xi : {-1.5, 0.0, 0.8}) {
    for (double eta : {-0.4, 1.1}) {
      const std::complex<double> k0 = kb::kac_kernel(0.0, xi, eta, params);
      const double expected = std::exp(-0.5 * params.gamma) / std::sqrt(kb::pi) *
                              kb::ktilde_kernel(xi, eta, params);
      CHECK_THAT(k0.real(), WithinRel(expected, 1e-14));
      CHECK_THAT(k0.imag(), WithinAbs(0.0, 1e-16));
    }
  }
}

TEST_CASE("kernel factorization splits off the cosh prefactor") {
  // K_beta(xi, eta) = sqrt(cosh(sqrt(beta) xi) cosh(sqrt(beta) eta)/(pi e^gamma))
  //                   * ktilde(xi, eta); holds with principal roots because the
  //                   remaining factor is a positive real.
  for (double lambda : {0.3, 0.5, 0.7}) {
    const ModelParams params(lambda);
    for (Beta beta : {Beta(0.0), Beta(0.7), Beta(2.0), Beta(0.5, 0.3)}) {
      for (double xi : {-1.8, -0.3, 0.9}) {
        for (double eta : {-1.1, 0.5, 1.6}) {
          const std::complex<double> sb = std::sqrt(beta);
          const std::complex<double> lhs = kb::kac_kernel(beta, xi, eta, params);
          const std::complex<double> rhs =
              std::sqrt(std::cosh(sb * xi) * std::cosh(sb * eta) /
                        (kb::pi * std::exp(params.gamma))) *
              kb::ktilde_kernel(xi, eta, params);
          CHECK_THAT(std::abs(lhs - rhs), WithinAbs(0.0, 1e-12 * std::abs(lhs)));
        }
      }
    }
  }
}

TEST_CASE("normalized kernel carries the (lambda e^beta)^{-1/2} factor") {
  const ModelParams params(0.5);
  const Beta beta(1.3);
  const std::complex<double> lhs = kb::g_kernel(beta, 0.4, -0.9, params);
  const std::complex<double> rhs =
      kb::kac_kernel(beta, 0.4, -0.9, params) / std::sqrt(0.5 * std::exp(1.3));
  CHECK_THAT(std::abs(lhs - rhs), WithinAbs(0.0, 1e-15));
}

TEST_CASE("hermite-basis matrix structure") {
  const ModelParams params(0.5);
  const auto b = kb::b_matrix(Beta(1.7), 30, params);
  REQUIRE(b.dim == 30);
  CHECK(b.basis == kb::Basis::Hermite);

  // Corner entry is exactly 2 for every beta; odd |n-m| entries vanish and
  // the matrix is symmetric by construction.
  CHECK(b.entries(0, 0) == std::complex<double>(2.0));
  CHECK(kb::b_matrix(Beta(0.0), 4, params).entries(0, 0) == std::complex<double>(2.0));
  CHECK(kb::b_matrix(Beta(0.5, 1.0), 4, params).entries(0, 0) == std::complex<double>(2.0));
  for (int n = 0; n < 30; ++n) {
    for (int m = 0; m < 30; ++m) {
      if ((n + m) % 2 == 1) CHECK(b.entries(n, m) == std::complex<double>(0.0));
      CHECK(b.entries(n, m) == b.entries(m, n));
    }
  }

  // Diagonal closed form: B_{m,m} = 2 lambda^m L_m(-beta).
  for (int m : {0, 1, 2, 5, 9, 20}) {
    const double expected = 2.0 * std::pow(0.5, m) * kb::laguerre_assoc(m, 0, -1.7);
    CHECK_THAT(b.entries(m, m).real(), WithinRel(expected, 1e-13));
  }

  // At beta = 0 the off-diagonal beta^mu factors kill every coupling exactly.
  const auto b0 = kb::b_matrix(Beta(0.0), 20, params);
  for (int n = 0; n < 20; ++n) {
    for (int m = 0; m < 20; ++m) {
      if (n == m)
        CHECK_THAT(b0.entries(n, n).real(), WithinRel(2.0 * std::pow(0.5, n), 1e-14));
      else
        CHECK(b0.entries(n, m) == std::complex<double>(0.0));
    }
  }
}

TEST_CASE("hermite-basis entries against the series oracle") {
  // Independent route: associated Laguerre evaluated by its terminating
  // series instead of the recurrence.
  const ModelParams params(0.35);
  const Beta beta(2.3);
  const auto b = kb::b_matrix(beta, 18, params);
  for (int n = 0; n < 18; ++n) {
    for (int m = n; m < 18; m += 2) {
      const double logmag = kb::log_factorial(n) -
                            0.5 * (kb::log_factorial(n) + kb::log_factorial(m)) -
                            0.5 * params.gamma * (n + m);
      const std::complex<double> expected = 2.0 * std::exp(logmag) *
                                            std::pow(2.3, (m - n) / 2) *
                                            oracles::laguerre_by_series(n, m - n, -2.3);
      CHECK_THAT(std::abs(b.entries(n, m) - expected), WithinAbs(0.0, 1e-12 * std::abs(expected)));
    }
  }
}

TEST_CASE("conjugating beta conjugates the hermite-basis matrix") {
  const ModelParams params(0.6);
  const auto b1 = kb::b_matrix(Beta(0.8, 1.4), 16, params);
  const auto b2 = kb::b_matrix(Beta(0.8, -1.4), 16, params);
  for (int n = 0; n < 16; ++n)
    for (int m = 0; m < 16; ++m)
      CHECK(b2.entries(n, m) == std::conj(b1.entries(n, m)));
}

TEST_CASE("trace closed form and partial diagonal sums") {
  const ModelParams params(0.5);
  CHECK_THAT(kb::trace_g_closed_form(0.0, params).real(), WithinRel(4.0, 1e-15));
  CHECK_THAT(kb::trace_g_closed_form(1.0, params).real(),
             WithinRel(4.0 * std::exp(1.0), 1e-15));

  for (double beta : {0.0, 1.0, 3.0}) {
    const auto b = kb::b_matrix(Beta(beta), 80, params);
    std::complex<double> diag_sum = 0.0;
    for (int m = 0; m < 80; ++m) diag_sum += b.entries(m, m);
    const std::complex<double> closed = kb::trace_g_closed_form(Beta(beta), params);
    INFO("beta = " << beta);
    CHECK_THAT(std::abs(diag_sum - closed), WithinAbs(0.0, 1e-10 * std::abs(closed)));
  }

  // Complex beta: the diagonal sum still converges to the closed form.
  const Beta bc(1.0, 2.0);
  const auto b = kb::b_matrix(bc, 120, params);
  std::complex<double> diag_sum = 0.0;
  for (int m = 0; m < 120; ++m) diag_sum += b.entries(m, m);
  const std::complex<double> closed = kb::trace_g_closed_form(bc, params);
  CHECK_THAT(std::abs(diag_sum - closed), WithinAbs(0.0, 1e-9 * std::abs(closed)));
}

TEST_CASE("power traces reproduce the lattice sums") {
  // tr G^n must equal Z_n / (1-lambda^n), the normalization shared with the
  // composition-type realization; Z_n comes from direct enumeration.
  for (double lambda : {0.3, 0.5}) {
    const ModelParams params(lambda);
    for (double beta : {0.5, 2.0}) {
      const auto b = kb::b_matrix(Beta(beta), 60, params);
      for (int n = 1; n <= 3; ++n) {
        const std::complex<double> lhs = kb::truncated_trace_power(b, n);
        const std::complex<double> rhs =
            kb::exact_trace_gutzwiller_power(n, Beta(beta), params);
        INFO("lambda = " << lambda << " beta = " << beta << " n = " << n);
        CHECK_THAT(std::abs(lhs - rhs), WithinAbs(0.0, 1e-10 * std::abs(rhs)));
      }
    }
  }
}

TEST_CASE("kernel power traces by direct integration") {
  // Settles the trace normalization independently of every matrix route:
  // integrate the kernel itself. tr K^n = (lambda e^beta)^{n/2} Z_n/(1-lambda^n).
  const ModelParams params(0.5);
  const double beta = 0.7;
  const double scale = std::sqrt(0.5 * std::exp(beta));
  const auto& rule = kb::gaussian_quadrature(600, 0.05);
  const std::size_t q = rule.nodes.size();

  double tr1 = 0.0;
  for (std::size_t i = 0; i < q; ++i)
    tr1 += rule.weights[i] * kb::kac_kernel(beta, rule.nodes[i], rule.nodes[i], params).real();
  const double z1 = kb::partition_function_exact(1, beta, params).real();
  CHECK_THAT(tr1, WithinRel(scale * z1 / (1.0 - 0.5), 1e-9));

  double tr2 = 0.0;
  for (std::size_t i = 0; i < q; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
      const double k = kb::kac_kernel(beta, rule.nodes[i], rule.nodes[j], params).real();
      row += rule.weights[j] * k * k;
    }
    tr2 += rule.weights[i] * row;
  }
  const double z2 = kb::partition_function_exact(2, beta, params).real();
  CHECK_THAT(tr2, WithinRel(scale * scale * z2 / (1.0 - 0.25), 1e-9));
}

TEST_CASE("quadrature section at beta = 0 is the known diagonal") {
  const ModelParams params(0.45);
  const auto res = kb::g_matrix_quadrature(0.0, 24, params);
  CHECK(res.matrix.basis == kb::Basis::Hermite);
  for (int n = 0; n < 24; ++n) {
    for (int m = 0; m < 24; ++m) {
      const double expected = (n == m) ? 2.0 * std::pow(0.45, n) : 0.0;
      CHECK_THAT(res.matrix.entries(n, m).real(), WithinAbs(expected, 1e-12));
      CHECK(res.matrix.entries(n, m).imag() == 0.0);
    }
  }
}

TEST_CASE("quadrature and closed-form sections realize one operator") {
  // The two symmetric sections come from different conjugations of the same
  // operator (square-root-of-cosh versus diagonal), so their entries differ
  // but every power trace must agree through the common lattice values.
  for (double lambda : {0.3, 0.5}) {
    const ModelParams params(lambda);
    const auto closed = kb::b_matrix(Beta(1.0), 60, params);
    const auto quad = kb::g_matrix_quadrature(1.0, 60, params);
    CHECK(quad.tail_bound > 0.0);
    CHECK(quad.tail_bound < 1e-10);
    for (int n = 1; n <= 3; ++n) {
      const std::complex<double> want = kb::exact_trace_ruelle_power(n, Beta(1.0), params);
      INFO("lambda = " << lambda << " n = " << n);
      CHECK_THAT(std::abs(kb::truncated_trace_power(quad.matrix, n) - want),
                 WithinAbs(0.0, 1e-9 * std::abs(want)));
      CHECK_THAT(std::abs(kb::truncated_trace_power(closed, n) - want),
                 WithinAbs(0.0, 1e-9 * std::abs(want)));
    }

    // Exact symmetry was enforced during assembly.
    for (int n = 0; n < 60; ++n)
      for (int m = 0; m < n; ++m)
        CHECK(quad.matrix.entries(n, m) == quad.matrix.entries(m, n));
  }
}

TEST_CASE("quadrature section trace against the closed form") {
  const ModelParams params(0.5);
  const auto res = kb::g_matrix_quadrature(1.0, 80, params);
  std::complex<double> diag_sum = 0.0;
  for (int m = 0; m < 80; ++m) diag_sum += res.matrix.entries(m, m);
  const std::complex<double> closed = kb::trace_g_closed_form(1.0, params);
  CHECK_THAT(std::abs(diag_sum - closed), WithinAbs(0.0, 1e-10 * std::abs(closed)));
}

TEST_CASE("integral-operator argument validation") {
  const ModelParams params(0.5);
  CHECK_THROWS_AS(kb::b_matrix(Beta(1.0), 0, params), std::domain_error);
  CHECK_THROWS_AS(kb::b_matrix(Beta(1.0), 1025, params), kb::resource_limit_error);
  CHECK_THROWS_AS(kb::g_matrix_quadrature(Beta(0.0, 1.0), 10, params), std::domain_error);
  CHECK_THROWS_AS(kb::g_matrix_quadrature(Beta(-0.5), 10, params), std::domain_error);
  CHECK_THROWS_AS(kb::g_matrix_quadrature(Beta(1.0), 0, params), std::domain_error);
  CHECK_THROWS_AS(kb::g_matrix_quadrature(Beta(1.0), 1025, params), kb::resource_limit_error);
  const Beta bad(std::numeric_limits<double>::quiet_NaN(), 0.0);
  CHECK_THROWS_AS(kb::kac_kernel(bad, 0.0, 0.0, params), std::domain_error);
}
