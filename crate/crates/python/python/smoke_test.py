"""Smoke test for the groth extension module.

Build and install first, e.g. ``maturin develop`` or
``maturin build && pip install ../../target/wheels/groth-*.whl`` from crates/python.
"""

import math

import groth


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b)


def main():
    close(groth.gamma_n(1), 2 / math.pi, 1e-12)
    close(groth.gamma_n(2), math.pi / 4, 1e-12)
    close(groth.c_m(3), 3 * math.pi / 8, 1e-12)

    c5 = groth.PsdMatrix.laplacian(5, [(i, (i + 1) % 5, 1.0) for i in range(5)])
    assert c5.m == 5
    assert c5.validate_psd()[1]
    sol = groth.solve_sdp_relaxation(c5, seed=1)
    close(sol.objective, 10 * (1 + math.cos(math.pi / 5)), 1e-6)
    assert len(sol.vectors) == 5 and sol.converged

    value, signs = groth.brute_force_sdp1(c5)
    assert value == 16.0 and signs[0] == 1
    grid, _ = groth.grid_search_rank2(c5, 60)
    assert value <= grid <= sol.objective + 1e-9

    r = groth.round_rank_n(c5, sol, 2, 7)
    assert r.n == 2 and len(r.vectors[0]) == 2
    best = groth.best_of_rounds(c5, sol, 1, 20, 3)
    assert best.objective <= 16.0 + 1e-9
    mean, se = groth.expected_ratio_estimate(c5, sol, 2, 2000, 5)
    assert mean >= groth.gamma_n(2) - 4 * se
    assert groth.hardness_reduction_check(c5, r)["passed"]

    ones = groth.PsdMatrix.ones(4)
    close(groth.objective_value(ones, [[1.0, 0.0]] * 4), 16.0, 1e-12)

    close(groth.en_integral(1, 0.5), 1 / 3, 1e-15)
    q = groth.en_integral(3, 0.4)
    est, se = groth.en_monte_carlo(3, 0.4, 200_000, 11)
    assert abs(q - est) <= 4 * se
    close(groth.f1_extract(3), 8 / (3 * math.pi), 1e-6)
    v, t0 = groth.v_n(1)
    close(v, 0.8785, 5e-4)
    close(t0, -0.689, 2e-3)

    c = groth.c_m(5)
    coeffs, residual = groth.positive_type_expand(lambda t: math.asin(t) - c * t, 5, 20)
    assert min(coeffs) >= -1e-8 and abs(coeffs[1]) < 1e-8 and residual >= 0
    lam = groth.check_positive_type_matrix(lambda t: t, [[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]])
    assert lam >= -1e-10
    close(groth.inner_product_alpha(lambda t: t, lambda t: t, 0.0), 2 / 3, 1e-12)

    def broken(t):
        raise RuntimeError("kernel failed")

    try:
        groth.positive_type_expand(broken, 3, 4)
    except RuntimeError as e:
        assert "kernel failed" in str(e)
    else:
        raise AssertionError("exception from the kernel was swallowed")

    try:
        groth.gamma_n(0)
    except ValueError:
        pass
    else:
        raise AssertionError("gamma_n(0) should raise")

    print("groth", groth.__version__, "smoke test passed")


if __name__ == "__main__":
    main()
