#!/usr/bin/env python3
"""Smoke test of the normsol_py extension module.

Builds nothing itself: run `cargo build --release -p normsol-py` first.
The script locates the compiled cdylib in target/, exposes it under the
importable module name, runs a small end-to-end solve in each regime and
checks the structural identities.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path


def import_extension():
    root = Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libnormsol_py.so", "normsol_py.so", "libnormsol_py.dylib")
    ]
    built = next((c for c in candidates if c.exists()), None)
    if built is None:
        sys.exit(
            "normsol_py cdylib not found; run `cargo build --release -p normsol-py` first"
        )
    staging = Path(tempfile.mkdtemp(prefix="normsol-py-"))
    shutil.copy2(built, staging / "normsol_py.so")
    sys.path.insert(0, str(staging))
    import normsol_py

    return normsol_py


def approx(a, b, rel):
    return abs(a - b) <= rel * max(abs(a), abs(b), 1e-300)


def main():
    ns = import_extension()

    # Grid quadrature against the Gaussian closed form.
    grid = ns.RadialGrid(3, 16.0, 2000)
    u = ns.RadialFunction.gaussian(grid, 1.0)
    assert approx(u.mass(), math.pi ** 1.5, 1e-6), u.mass()
    assert approx(u.grad_norm_sq(), 1.5 * math.pi ** 1.5, 1e-4)

    # Mass-preserving dilation and the fiber identity.
    us = u.project_sphere(1.0)
    d = ns.dilate(us, 0.8)
    assert approx(d.mass(), 1.0, 1e-12)
    model = ns.NonlinearityModel.combined_power(30.0, 4.0, 3)
    s_star, j_max = ns.max_over_dilations(us, model)
    assert j_max >= ns.energy(us, model)

    # End-to-end solve, Sobolev-critical regime.
    report = ns.solve(us, model, 1.0)
    assert report.converged, report
    assert report.lam < 0.0
    assert abs(report.pohozaev) <= 1e-6 * max(1.0, report.grad_sq)
    lam_formula = -30.0 * (3.0 / 4.0 - 0.5) * report.profile.lp_norm_pow(4.0)
    assert approx(report.lam, lam_formula, 1e-6)
    print(f"combined power: {report!r}")

    # End-to-end solve, planar exponential regime.
    grid2 = ns.RadialGrid(2, 24.0, 4000)
    seed2 = ns.RadialFunction.gaussian(grid2, 1.0)
    model2 = ns.NonlinearityModel.exp_critical(1000.0, 6.0)
    report2 = ns.solve(seed2, model2, 0.5)
    assert report2.converged, report2
    assert report2.lam < 0.0
    assert report2.grad_sq < 1.0 - 0.25
    print(f"exponential:    {report2!r}")

    # Guarded exponential raises on overflow amplitudes.
    try:
        ns.moser_functional(
            ns.RadialFunction(grid2, [40.0] * len(grid2)), ns.ALPHA_0
        )
    except OverflowError:
        pass
    else:
        raise AssertionError("overflow guard did not trigger")

    print("smoke test passed")


if __name__ == "__main__":
    main()
