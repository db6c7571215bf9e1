"""Smoke test for the cayley_qmc_py extension.

Build and install with
    pip install --no-build-isolation -e crates/python
then run
    python python/smoke_test.py
"""

import math

import cayley_qmc_py as cq


def main():
    t1, t2, b1, b2 = cq.critical_points()
    assert 1.05 < t1 < 1.1 and 1.5 < t2 < 1.6
    assert abs(b1 - 0.41589) < 1e-5 and abs(b2 - 1.02633) < 1e-5
    print(f"beta* = {b1:.12f}, beta** = {b2:.12f}")

    assert cq.regime(0.2) == "Unique" and cq.regime(0.6) == "Window"
    assert len(cq.fixed_points(0.2)) == 1 and len(cq.fixed_points(0.6)) == 2

    orbit = cq.trajectory(0.5, 1.0, 0.3)
    assert orbit["outcome"] == "ConvergedToFree"
    print(f"trajectory: {orbit['outcome']} after {len(orbit['points']) - 1} steps")

    gap = cq.quasi_equiv_gap(0.6)
    for n in range(10):
        diff = cq.expectation_sigma1("gamma", 0.6, n) - cq.expectation_sigma1("alpha0", 0.6, n)
        assert abs(diff) >= gap["epsilon0"] or n < gap["n0"]
    print(f"epsilon0 at beta 0.6 = {gap['epsilon0']:.6f}")

    beta = 0.3
    assert abs(cq.free_energy(beta) - 12 * math.log(math.cosh(beta)) / beta) < 1e-12
    assert abs(cq.free_energy_finite(beta, 12) - cq.free_energy(beta)) < 1e-3

    for name in ("beta_star", "beta_star2"):
        at, closed, numeric = cq.derivative_jump(name)
        assert abs(numeric - closed) <= 1e-3 * abs(closed)
        print(f"jump at {at:.6f}: closed {closed:+.6f}, numeric {numeric:+.6f}")

    try:
        cq.expectation_sigma1("gamma", 0.2, 1)
    except ValueError:
        pass
    else:
        raise AssertionError("gamma outside the window must raise")

    passed, checks = cq.verify("quick")
    assert passed, [name for _, name, ok, _ in checks if not ok]
    print(f"verify quick: {len(checks)} checks passed")
    print("smoke test OK")


if __name__ == "__main__":
    main()
