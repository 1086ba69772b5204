#!/usr/bin/env python3
"""Independent cross-check of the variational solver by ODE shooting.

Solves the radial stationarity equation

    u'' + (N-1)/r u' + lam*u + f(u) = 0,   u'(0) = 0,  u(R) -> 0,

as a two-parameter root problem in (u(0), lam) matching the boundary decay
and the mass constraint, using adaptive Runge-Kutta integration — a method
sharing no code or discretization with the solver. Needs scipy.

Run a solve first so the reference report exists, e.g.

    cargo build --release -p normsol-cli
    target/release/normsol solve --out out/ref3
    python3 python/cross_check_shooting.py out/ref3
"""

import json
import math
import sys
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import fsolve

ALPHA_0 = 4.0 * np.pi


def make_f(cfg):
    if cfg["dimension"] == 2:
        mu, p = cfg["mu"], cfg["p"]

        def f(u):
            return mu * np.sign(u) * np.abs(u) ** (p - 1.0) * np.exp(ALPHA_0 * u * u)

        def big_f(u):
            x = ALPHA_0 * u * u
            term, total, k = 1.0, 1.0 / p, 1.0
            while True:
                term *= x / k
                c = term / (p + 2.0 * k)
                total += c
                if c <= total * 1e-17 and k > x:
                    break
                k += 1.0
            return mu * np.abs(u) ** p * total

        return f, np.vectorize(big_f)

    mu, q, n = cfg["mu"], cfg["q"], cfg["dimension"]
    two_star = 2.0 * n / (n - 2.0)

    def f(u):
        a = np.abs(u)
        return (mu * a ** (q - 2.0) + a ** (two_star - 2.0)) * u

    def big_f(u):
        a = np.abs(u)
        return mu / q * a**q + a**two_star / two_star

    return f, big_f


def main():
    ref_dir = Path(sys.argv[1] if len(sys.argv) > 1 else "out")
    report = json.loads((ref_dir / "report.json").read_text())
    cfg = report["config"]
    n = cfg["dimension"]
    radius = cfg["radius"]
    a_sq = cfg["a"] ** 2
    rows = (ref_dir / "profile.csv").read_text().splitlines()[1:]
    u0_ref = float(rows[0].split(",")[1])
    lam_ref = report["lambda"]
    gamma_ref = report["gamma"]
    omega = 2.0 * np.pi if n == 2 else 2.0 * np.pi ** (n / 2.0) / math.gamma(n / 2.0)

    f, big_f = make_f(cfg)

    def rhs(r, y, lam):
        u, up = y
        val = lam * u + f(u)
        if r < 1e-12:
            return [up, -val / n]
        return [up, -(n - 1.0) / r * up - val]

    def shoot(params):
        a0, lam = params
        sol = solve_ivp(
            rhs, [0.0, radius], [a0, 0.0], args=(lam,),
            rtol=1e-10, atol=1e-13, dense_output=True, max_step=0.05,
        )
        r = np.linspace(0.0, radius, 4001)
        u = sol.sol(r)[0]
        mass = omega * np.trapezoid(u**2 * r ** (n - 1), r)
        return [u[-1], mass - a_sq]

    a0, lam = fsolve(shoot, [u0_ref, lam_ref], xtol=1e-12)
    sol = solve_ivp(
        rhs, [0.0, radius], [a0, 0.0], args=(lam,),
        rtol=1e-11, atol=1e-13, dense_output=True, max_step=0.05,
    )
    r = np.linspace(0.0, radius, 8001)
    u, up = sol.sol(r)
    grad = omega * np.trapezoid(up**2 * r ** (n - 1), r)
    bf = omega * np.trapezoid(big_f(u) * r ** (n - 1), r)
    gamma = grad / 2.0 - bf

    def rel(x, y):
        return abs(x - y) / max(abs(y), 1e-300)

    print(f"shooting:    u(0) = {a0:.8f}  lambda = {lam:.8f}  J = {gamma:.8f}")
    print(f"variational: u(0) = {u0_ref:.8f}  lambda = {lam_ref:.8f}  J = {gamma_ref:.8f}")
    print(
        f"relative differences: u(0) {rel(a0, u0_ref):.2e}, "
        f"lambda {rel(lam, lam_ref):.2e}, J {rel(gamma, gamma_ref):.2e}"
    )
    tol = 5e-4
    ok = rel(a0, u0_ref) < tol and rel(lam, lam_ref) < tol and rel(gamma, gamma_ref) < tol
    print("cross-check " + ("passed" if ok else "FAILED"))
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
