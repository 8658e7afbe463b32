"""Python smoke tests: cross-check the bound operations against numpy oracles."""

import numpy as np

import stoc


def test_apply_matches_numpy_kron():
    p = stoc.Problem(dim=1, n=4, n_t=3, rho=0.1)
    mt = p.temporal_mass()
    at = p.temporal_stiffness()
    mx = p.spatial_mass()
    ax = p.spatial_stiffness()
    k_np = np.kron(mt, mx) + 0.1 * (np.kron(at, mx) + np.kron(mt, ax))

    rng = np.random.default_rng(0)
    for _ in range(5):
        v = rng.uniform(-1, 1, p.n_dofs)
        assert np.allclose(p.apply(v), k_np @ v, rtol=1e-10, atol=1e-12)

    k_lib = p.dense_operator("K")
    assert np.allclose(k_lib, k_np, rtol=1e-12, atol=1e-14)

    b_np = np.kron(p.temporal_convection(), mx) + np.kron(mt, ax)
    v = rng.uniform(-1, 1, p.n_dofs)
    assert np.allclose(p.recover_control(v), b_np @ v, rtol=1e-10, atol=1e-12)

    d_np = np.kron(at, mx) + np.kron(mt, ax)
    assert np.isclose(p.anisotropic_norm_sq(v), v @ (d_np @ v), rtol=1e-10)


def test_unconstrained_solve_against_numpy():
    p = stoc.Problem(dim=1, n=8)
    res = p.solve_unconstrained(cg_tol=1e-12)
    assert res["converged"]
    k_np = p.dense_operator("K")
    u_np = np.linalg.solve(k_np, p.load)
    assert np.allclose(res["u"], u_np, rtol=0, atol=1e-8)


def test_constrained_solve_feasible_and_complementary():
    p = stoc.Problem(dim=3, n=4)
    res = p.solve_constrained(lower=0.0, upper=0.8)
    assert res["converged"]
    u = res["u"]
    lam = res["lambda"]
    assert u.min() >= -1e-8
    assert u.max() <= 0.8 + 1e-8
    part = np.asarray(res["partition"])
    assert np.all(lam[part == 1] <= 1e-8)   # upper active: lambda <= 0
    assert np.all(lam[part == -1] >= -1e-8)  # lower active: lambda >= 0
    assert np.all(np.abs(lam[part == 0]) <= 1e-8)

    traj = p.trajectory(u, [0.51, 0.51, 0.51])
    assert traj["t"][0] == 0.0
    assert traj["u"][0] == 0.0
    assert traj["u"].max() <= 0.8 + 1e-8


def test_eigenvalues_and_errors():
    p = stoc.Problem(dim=1, n=16)
    lam = p.eigenvalues
    assert np.all(np.diff(lam) > 0)
    assert abs(lam[0] - np.pi / 2) < 1e-3
    assert p.eigenbasis_mode in ("fast-sine", "dense")

    zero = np.zeros(p.n_dofs)
    err_one = stoc.Problem(dim=1, n=4, target="one").l2q_error(np.zeros(3 * 4), bounds=None, quad_order=5)
    assert abs(err_one - 1.0) < 1e-12
    assert p.l2q_error(zero, bounds=None, quad_order=5) >= 0.0

    assert "sines" in stoc.builtin_targets()


if __name__ == "__main__":
    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
                print(f"[PASS] {name}")
            except AssertionError as exc:
                failures += 1
                print(f"[FAIL] {name}: {exc}")
    raise SystemExit(1 if failures else 0)
