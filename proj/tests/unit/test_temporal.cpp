#include "doctest.h"

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "stoc/temporal.hpp"

using namespace stoc;
namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("temporal mass matrix entries") {
  // T=1, N_t=2: M = [[1/3, 1/12],[1/12, 1/6]]
  const TemporalMesh mesh(1.0, 2);
  const TriDiagonalMatrix m = assemble_temporal_mass(mesh);
  CHECK(m.diag[0] == doctest::Approx(1.0 / 3.0));
  CHECK(m.diag[1] == doctest::Approx(1.0 / 6.0));
  CHECK(m.super[0] == doctest::Approx(1.0 / 12.0));
  CHECK(m.is_symmetric());
  CHECK(tridiagonal_is_spd(m));

  const TemporalMesh single(1.0, 1);
  CHECK(assemble_temporal_mass(single).diag[0] == doctest::Approx(1.0 / 3.0));

  // interior row sums equal h_t (partition of unity against a full hat)
  const TemporalMesh fine(2.0, 7);
  const TriDiagonalMatrix mf = assemble_temporal_mass(fine);
  for (std::size_t j = 1; j + 1 < 7; ++j)
    CHECK(mf.sub[j - 1] + mf.diag[j] + mf.super[j] == doctest::Approx(fine.dt()));
}

TEST_CASE("temporal convection matrix follows the defining integral") {
  const TemporalMesh mesh(1.0, 2);
  const TriDiagonalMatrix g = assemble_temporal_convection(mesh);
  // G[l,k] = ∫ φ_k' φ_l; quadrature oracle fixes the sign convention
  const auto entry_oracle = [&](std::size_t l, std::size_t k) {
    double total = 0.0;
    const double h = mesh.dt();
    for (std::size_t e = 0; e < mesh.n_dofs; ++e) {
      const double a = mesh.node(e);
      total += oracles::integrate(
          [&](double t) {
            const double eps = 1e-9;
            const double dphi_k = (oracles::temporal_hat(mesh, k, t + eps) - oracles::temporal_hat(mesh, k, t - eps)) /
                                  (2.0 * eps);
            return dphi_k * oracles::temporal_hat(mesh, l, t);
          },
          a + 1e-7, a + h - 1e-7, 16);
    }
    return total;
  };
  CHECK(g.diag[0] == doctest::Approx(entry_oracle(1, 1)).epsilon(1e-5));
  CHECK(g.super[0] == doctest::Approx(entry_oracle(1, 2)).epsilon(1e-5));
  CHECK(g.sub[0] == doctest::Approx(entry_oracle(2, 1)).epsilon(1e-5));
  CHECK(g.diag[1] == doctest::Approx(entry_oracle(2, 2)).epsilon(1e-5));
  CHECK(g.super[0] == doctest::Approx(0.5));
  CHECK(g.sub[0] == doctest::Approx(-0.5));
  CHECK(g.diag[1] == doctest::Approx(0.5));

  const TemporalMesh single(1.0, 1);
  CHECK(assemble_temporal_convection(single).diag[0] == doctest::Approx(0.5));  // ∫ 1·t dt
}

TEST_CASE("convection matrix satisfies the integration-by-parts identities") {
  const TemporalMesh mesh(1.0, 6);
  const TriDiagonalMatrix g = assemble_temporal_convection(mesh);
  const std::size_t n = mesh.n_dofs;
  // G + Gᵀ is zero except entry (N,N) = 1
  for (std::size_t j = 0; j + 1 < n; ++j) CHECK(g.sub[j] + g.super[j] == doctest::Approx(0.0));
  for (std::size_t j = 0; j + 1 < n; ++j) CHECK(g.diag[j] == doctest::Approx(0.0));
  CHECK(g.diag[n - 1] == doctest::Approx(0.5));
  // vᵀGv = v_N²/2
  for (unsigned seed : {1u, 2u, 3u}) {
    const auto v = oracles::random_vector(n, seed);
    std::vector<double> gv(n);
    g.multiply(v.data(), gv.data());
    double quad = 0.0;
    for (std::size_t j = 0; j < n; ++j) quad += v[j] * gv[j];
    CHECK(quad == doctest::Approx(0.5 * v[n - 1] * v[n - 1]).epsilon(1e-12));
  }
}

TEST_CASE("hat-sine moments match the closed forms and the quadrature oracle") {
  const TemporalMesh mesh(1.0, 2);
  // frozen values computed with the 64-point elementwise Gauss oracle
  CHECK(hat_sine_moment(mesh, 0, 1) == doctest::Approx(0.335749).epsilon(1e-6));
  CHECK(hat_sine_moment(mesh, 0, 2) == doctest::Approx(0.237410).epsilon(1e-6));

  const TemporalMesh single(1.0, 1);
  for (std::size_t k : {0ul, 1ul, 5ul}) {
    const double lam = (0.5 + static_cast<double>(k)) * kPi;
    const double expected = (k % 2 == 0 ? 1.0 : -1.0) / (lam * lam);
    CHECK(hat_sine_moment(single, k, 1) == doctest::Approx(expected).epsilon(1e-14));
  }

  for (std::size_t n : {2ul, 5ul, 64ul}) {
    const TemporalMesh m(1.0, n);
    for (std::size_t k = 0; k <= 50; k += 7)
      for (std::size_t i = 1; i <= n; i += std::max<std::size_t>(1, n / 3))
        CHECK(hat_sine_moment(m, k, i) ==
              doctest::Approx(oracles::hat_sine_moment_quadrature(m, k, i)).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("hilbert stiffness analytic value and invariants") {
  const TemporalMesh mesh(1.0, 1);
  const DenseSymMatrix a = assemble_hilbert_stiffness(mesh, 1e-10);
  const double zeta3 = 1.2020569031595942854;
  CHECK(a(0, 0) == doctest::Approx(14.0 * zeta3 / (kPi * kPi * kPi)).epsilon(1e-9));

  // symmetric positive definite at larger sizes, both assembly routes agree
  const TemporalMesh mesh8(1.0, 8);
  const DenseSymMatrix direct = assemble_hilbert_stiffness_direct(mesh8, 1e-10, 20'000'000);
  const DenseSymMatrix folded = assemble_hilbert_stiffness(mesh8, 1e-10, 1'000'000, 0);
  CHECK(direct.max_asymmetry() == 0.0);
  double diff = 0.0;
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) diff = std::max(diff, std::abs(direct(i, j) - folded(i, j)));
  CHECK(diff < 1e-9 * direct.max_abs());

  for (unsigned seed = 0; seed < 100; ++seed) {
    const auto v = oracles::random_vector(8, seed);
    std::vector<double> av(8);
    folded.multiply(v, av);
    double vav = 0.0;
    for (std::size_t i = 0; i < 8; ++i) vav += v[i] * av[i];
    CHECK(vav > 0.0);
  }
}

TEST_CASE("series truncation: tightening the tolerance changes A below the coarse tolerance") {
  const TemporalMesh mesh(1.0, 4);
  const DenseSymMatrix coarse = assemble_hilbert_stiffness_direct(mesh, 1e-6, 20'000'000);
  const DenseSymMatrix fine = assemble_hilbert_stiffness_direct(mesh, 1e-8, 20'000'000);
  double diff = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) diff = std::max(diff, std::abs(coarse(i, j) - fine(i, j)));
  CHECK(diff < 1e-6 * coarse.max_abs());
}

TEST_CASE("hilbert stiffness cap reached signals failure") {
  const TemporalMesh mesh(1.0, 4);
  CHECK_THROWS_AS((void)assemble_hilbert_stiffness_direct(mesh, 1e-10, 100), std::runtime_error);
}

TEST_CASE("temporal energy of the first continuous eigenfunction tends to pi/4") {
  // vᵀ A v -> (π/2)·‖sin(πt/2)‖² = π/4 for nodal samples of sin(πt/2)
  const TemporalMesh mesh(1.0, 64);
  const DenseSymMatrix a = assemble_hilbert_stiffness(mesh, 1e-10);
  std::vector<double> v(64);
  for (std::size_t i = 0; i < 64; ++i) v[i] = std::sin(0.5 * kPi * mesh.node(i + 1));
  std::vector<double> av(64);
  a.multiply(v, av);
  double vav = 0.0;
  for (std::size_t i = 0; i < 64; ++i) vav += v[i] * av[i];
  CHECK(vav == doctest::Approx(kPi / 4.0).epsilon(2e-4));  // O(h_t²) away
}

TEST_CASE("dense generalized EVP: 1x1 case and contracts") {
  const TemporalMesh mesh(1.0, 1);
  const DenseSymMatrix a = assemble_hilbert_stiffness(mesh, 1e-10);
  const TriDiagonalMatrix m = assemble_temporal_mass(mesh);
  const TemporalEigenbasis basis = solve_generalized_evp(a, m);
  CHECK(basis.mode() == EigenbasisMode::dense);
  CHECK(basis.eigenvalues()[0] == doctest::Approx(3.0 * a(0, 0)).epsilon(1e-12));
  CHECK(basis.eigenvalues()[0] == doctest::Approx(1.628265).epsilon(1e-6));
  CHECK(std::abs(basis.dense_vectors()(0, 0)) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("eigenbasis contracts for dense and fast modes") {
  for (std::size_t n : {3ul, 8ul, 33ul}) {
    const TemporalMesh mesh(1.0, n);
    const DenseSymMatrix a = assemble_hilbert_stiffness(mesh, 1e-10);
    const TriDiagonalMatrix m = assemble_temporal_mass(mesh);
    const DenseMatrix md = m.to_dense();

    const TemporalEigenbasis dense = solve_generalized_evp(a, m);
    const auto fast = try_fast_eigenbasis(mesh, a, m, 1e-8);
    REQUIRE(fast.has_value());

    for (const TemporalEigenbasis* basis : {&dense, &*fast}) {
      const DenseMatrix c = basis->materialize_vectors();
      const auto& lam = basis->eigenvalues();
      double lam_max = lam.back();
      CHECK(std::is_sorted(lam.begin(), lam.end()));
      CHECK(lam.front() > 0.0);
      double worst_orth = 0.0, worst_res = 0.0;
      for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
          double ctmc = 0.0;
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) ctmc += c(i, p) * md(i, j) * c(j, q);
          worst_orth = std::max(worst_orth, std::abs(ctmc - (p == q ? 1.0 : 0.0)));
        }
        for (std::size_t i = 0; i < n; ++i) {
          double av = 0.0, mv = 0.0;
          for (std::size_t j = 0; j < n; ++j) {
            av += a(i, j) * c(j, p);
            mv += md(i, j) * c(j, p);
          }
          worst_res = std::max(worst_res, std::abs(av - lam[p] * mv));
        }
      }
      CHECK(worst_orth < 1e-10);
      CHECK(worst_res < 1e-8 * lam_max);
    }

    // fast eigenvalues match the dense path
    for (std::size_t j = 0; j < n; ++j)
      CHECK(fast->eigenvalues()[j] == doctest::Approx(dense.eigenvalues()[j]).epsilon(1e-8));
  }
}

TEST_CASE("transform round trip in both modes") {
  for (bool force_dense : {false, true}) {
    const std::size_t n = 16;
    const TemporalMesh mesh(1.0, n);
    const DenseSymMatrix a = assemble_hilbert_stiffness(mesh, 1e-10);
    const TriDiagonalMatrix m = assemble_temporal_mass(mesh);
    TemporalEigenbasis basis = force_dense ? solve_generalized_evp(a, m) : *try_fast_eigenbasis(mesh, a, m, 1e-8);

    const auto v = oracles::random_vector(n, 42);
    std::vector<double> vhat(n), back(n), scratch(2 * n);
    basis.analysis(v.data(), vhat.data(), scratch.data());
    basis.synthesis(vhat.data(), back.data(), scratch.data());
    for (std::size_t i = 0; i < n; ++i) CHECK(back[i] == doctest::Approx(v[i]).epsilon(1e-12));
  }
}

TEST_CASE("fast eigenbasis single dof matches the dense path exactly") {
  const TemporalMesh mesh(1.0, 1);
  const DenseSymMatrix a = assemble_hilbert_stiffness(mesh, 1e-10);
  const TriDiagonalMatrix m = assemble_temporal_mass(mesh);
  const auto fast = try_fast_eigenbasis(mesh, a, m, 1e-8);
  REQUIRE(fast.has_value());
  CHECK(fast->materialize_vectors()(0, 0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
}

TEST_CASE("analytic fast eigenbasis agrees with the dense route") {
  for (std::size_t n : {1ul, 8ul, 64ul, 256ul}) {
    const TemporalMesh mesh(1.0, n);
    const DenseSymMatrix a = assemble_hilbert_stiffness(mesh, 1e-10);
    const TriDiagonalMatrix m = assemble_temporal_mass(mesh);
    const TemporalEigenbasis dense = solve_generalized_evp(a, m);
    const TemporalEigenbasis analytic = make_fast_eigenbasis_analytic(mesh);
    for (std::size_t j = 0; j < n; ++j)
      CHECK(analytic.eigenvalues()[j] == doctest::Approx(dense.eigenvalues()[j]).epsilon(1e-8));
  }

  // horizon scaling: eigenvalues carry 1/T units
  for (const double horizon : {0.5, 2.0}) {
    const std::size_t n = 16;
    const TemporalMesh mesh(horizon, n);
    const DenseSymMatrix a = assemble_hilbert_stiffness(mesh, 1e-10);
    const TemporalEigenbasis dense = solve_generalized_evp(a, assemble_temporal_mass(mesh));
    const TemporalEigenbasis analytic = make_fast_eigenbasis_analytic(mesh);
    const TemporalEigenbasis unit = make_fast_eigenbasis_analytic(TemporalMesh(1.0, n));
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(analytic.eigenvalues()[j] == doctest::Approx(dense.eigenvalues()[j]).epsilon(1e-8));
      CHECK(analytic.eigenvalues()[j] == doctest::Approx(unit.eigenvalues()[j] / horizon).epsilon(1e-12));
    }
  }
}

TEST_CASE("first generalized eigenvalue converges to pi/2") {
  double prev_err = 0.0;
  for (std::size_t n : {16ul, 32ul, 64ul}) {
    const TemporalMesh mesh(1.0, n);
    const DenseSymMatrix a = assemble_hilbert_stiffness(mesh, 1e-10);
    const TemporalEigenbasis basis = solve_generalized_evp(a, assemble_temporal_mass(mesh));
    const double err = std::abs(basis.eigenvalues()[0] - kPi / 2.0);
    if (prev_err > 0.0) CHECK(prev_err / err > 3.0);  // at least second order
    prev_err = err;
  }
}
