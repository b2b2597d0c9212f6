#!/usr/bin/env python3
"""Independent oracle for the spectral and geometric constants baked into conekit.

Everything here is computed from scratch with exact (rational) arithmetic or
symbolic calculus, without using any formula from the Rust implementation:

  1. Coclosed 1-form spectrum of round spheres S^m (m = 3, 5).
     * Multiplicities: exact kernel dimensions of the tangentiality constraint
       on harmonic polynomial 1-forms (integer linear algebra).
     * Eigenvalues: the full Hodge Laplacian of candidate eigenforms is
       evaluated symbolically in a stereographic chart and compared with
       lambda * form at exact rational sample points.
     * Emits fixtures/sphere_coclosed_m{3,5}.json.

  2. Scalar-flatness of the spatial Schwarzschild slice (n_real = 3, 4),
     checked symbolically in the (r, link) chart.

  3. Radial Kahler potential families: the boundary-integral mass density is
     reduced symbolically and its r -> infinity limit computed, for
     u = s^2/2 + c log s   (n = 2)  and  u = s^2/2 + c s^(4-2n)  (n = 3).

  4. Harmonicity (dbar and dbar*) of the explicit obstruction forms on C^2\{0}.

Run:  python3 oracles/spectrum_oracle.py --emit
"""

import argparse
import itertools
import json
import os
import sys
from fractions import Fraction

import sympy as sp


# ---------------------------------------------------------------------------
# polynomial helpers (exact integer linear algebra)
# ---------------------------------------------------------------------------

def monomials(nvars, deg):
    """All exponent tuples of total degree deg in nvars variables."""
    if nvars == 1:
        return [(deg,)]
    out = []
    for d0 in range(deg + 1):
        for rest in monomials(nvars - 1, deg - d0):
            out.append((d0,) + rest)
    return out


def laplacian_matrix(nvars, deg):
    """Matrix of the flat Laplacian Poly_deg -> Poly_{deg-2} over the integers."""
    dom = monomials(nvars, deg)
    if deg < 2:
        return sp.zeros(0, len(dom)), dom, []
    rng = monomials(nvars, deg - 2)
    rindex = {m: i for i, m in enumerate(rng)}
    mat = sp.zeros(len(rng), len(dom))
    for j, m in enumerate(dom):
        for v in range(nvars):
            if m[v] >= 2:
                tgt = list(m)
                tgt[v] -= 2
                mat[rindex[tuple(tgt)], j] += m[v] * (m[v] - 1)
    return mat, dom, rng


def harmonic_basis(nvars, deg):
    """Exact rational basis of harmonic polynomials of given degree."""
    mat, dom, _ = laplacian_matrix(nvars, deg)
    if mat.rows == 0:
        return sp.eye(len(dom)), dom
    null = mat.nullspace()
    basis = sp.Matrix.hstack(*null) if null else sp.zeros(len(dom), 0)
    return basis, dom


def coclosed_multiplicity(m, d):
    """dim { (P_1..P_{m+1}) harmonic of degree d : sum x_i P_i = 0 }.

    These are exactly the degree-d polynomial 1-forms on R^{m+1} that restrict
    to coclosed eigenforms on S^m; the count is an exact rank computation.
    """
    nv = m + 1
    hb, dom = harmonic_basis(nv, d)
    h = hb.cols
    rng = monomials(nv, d + 1)
    rindex = {mm: i for i, mm in enumerate(rng)}
    # columns: (component i, harmonic basis vector k) -> x_i * P_k in Poly_{d+1}
    mat = sp.zeros(len(rng), nv * h)
    for i in range(nv):
        for k in range(h):
            col = i * h + k
            for row_m, coeff in zip(dom, hb.col(k)):
                if coeff != 0:
                    tgt = list(row_m)
                    tgt[i] += 1
                    mat[rindex[tuple(tgt)], col] += coeff
    return nv * h - mat.rank(), h


def harm_dim(nvars, deg):
    if deg < 0:
        return 0
    def full(n, d):
        if d < 0:
            return 0
        return sp.binomial(n + d - 1, d)
    return int(full(nvars, deg) - full(nvars, deg - 2))


# ---------------------------------------------------------------------------
# symbolic Hodge Laplacian on 1-forms, stereographic chart of S^m
# ---------------------------------------------------------------------------

def stereographic_map(m, ys):
    s2 = sum(y * y for y in ys)
    den = 1 + s2
    return [2 * y / den for y in ys] + [(1 - s2) / den]


def pullback_oneform(m, amb_components, ys):
    """Pull an ambient 1-form sum P_i dx_i back through the stereographic chart."""
    u = stereographic_map(m, ys)
    comps = []
    for a in range(m):
        acc = sp.Integer(0)
        for i in range(m + 1):
            acc += amb_components[i](u) * sp.diff(u[i], ys[a])
        comps.append(sp.together(acc))
    return comps


def hodge_laplacian_oneform(m, w, ys):
    """Delta = d delta + delta d on a 1-form, round metric g = c * I,
    c = 4/(1+|y|^2)^2, positive (geometer's) convention."""
    s2 = sum(y * y for y in ys)
    c = 4 / (1 + s2) ** 2
    half_m = sp.Rational(m, 2)
    # delta on 1-forms: -c^{-m/2} d_i ( c^{m/2 - 1} w_i )
    divw = sp.Integer(0)
    for i in range(m):
        divw += sp.diff(c ** (half_m - 1) * w[i], ys[i])
    delta_w = -(c ** (-half_m)) * divw
    d_delta = [sp.diff(delta_w, ys[j]) for j in range(m)]
    # F_kl = d_k w_l - d_l w_k ; (delta F)_j = -c^{1-m/2} d_k ( c^{m/2 - 2} F_kj )
    delta_d = []
    for j in range(m):
        acc = sp.Integer(0)
        for k in range(m):
            F_kj = sp.diff(w[j], ys[k]) - sp.diff(w[k], ys[j])
            acc += sp.diff(c ** (half_m - 2) * F_kj, ys[k])
        delta_d.append(-(c ** (1 - half_m)) * acc)
    return [d_delta[j] + delta_d[j] for j in range(m)]


def check_eigenform(m, d, n_points=4, n_forms=2):
    """Verify Delta (iota^* omega) = (d+1)(d+m-2) iota^* omega at rational points
    for tangential harmonic polynomial 1-forms of degree d."""
    nv = m + 1
    hb, dom = harmonic_basis(nv, d)
    h = hb.cols
    rng = monomials(nv, d + 1)
    rindex = {mm: i for i, mm in enumerate(rng)}
    mat = sp.zeros(len(rng), nv * h)
    for i in range(nv):
        for k in range(h):
            col = i * h + k
            for row_m, coeff in zip(dom, hb.col(k)):
                if coeff != 0:
                    tgt = list(row_m)
                    tgt[i] += 1
                    mat[rindex[tuple(tgt)], col] += coeff
    null = mat.nullspace()
    assert null, "no tangential forms found"
    lam = (d + 1) * (d + m - 2)
    ys = sp.symbols(f"y0:{m}")

    def poly_eval(vec):
        # vec: coefficients over harmonic basis -> polynomial component functions
        comps = []
        for i in range(nv):
            coeffs = hb * sp.Matrix(vec[i * h:(i + 1) * h])
            def make(cfs):
                def f(u):
                    acc = sp.Integer(0)
                    for mono, cf in zip(dom, cfs):
                        if cf != 0:
                            term = cf
                            for vv, e in enumerate(mono):
                                term *= u[vv] ** e
                            acc += term
                    return acc
                return f
            comps.append(make(list(coeffs)))
        return comps

    import random
    random.seed(7)
    for vec in null[:n_forms]:
        amb = poly_eval(list(vec))
        w = pullback_oneform(m, amb, ys)
        lap = hodge_laplacian_oneform(m, w, ys)
        for _ in range(n_points):
            subs = {y: sp.Rational(random.randint(-3, 3), random.randint(4, 9)) for y in ys}
            for j in range(m):
                lhs = sp.nsimplify(lap[j].subs(subs))
                rhs = lam * w[j].subs(subs)
                diff = sp.simplify(lhs - rhs)
                assert diff == 0, f"eigenvalue check failed m={m} d={d}: {diff}"
    return lam


# ---------------------------------------------------------------------------
# Schwarzschild spatial slice scalar curvature
# ---------------------------------------------------------------------------

def scalar_curvature(gmat, coords):
    dim = len(coords)
    ginv = gmat.inv()
    Gamma = [[[sp.Integer(0)] * dim for _ in range(dim)] for _ in range(dim)]
    for k in range(dim):
        for i in range(dim):
            for j in range(dim):
                acc = sp.Integer(0)
                for l in range(dim):
                    acc += ginv[k, l] * (sp.diff(gmat[j, l], coords[i])
                                         + sp.diff(gmat[i, l], coords[j])
                                         - sp.diff(gmat[i, j], coords[l]))
                Gamma[k][i][j] = acc / 2
    R = sp.Integer(0)
    for i in range(dim):
        for j in range(dim):
            acc = sp.Integer(0)
            for k in range(dim):
                acc += sp.diff(Gamma[k][i][j], coords[k]) - sp.diff(Gamma[k][k][j], coords[i])
                for l in range(dim):
                    acc += Gamma[k][k][l] * Gamma[l][i][j] - Gamma[k][i][l] * Gamma[l][k][j]
            R += ginv[i, j] * acc
    return R


def check_schwarzschild(n_real):
    m = n_real - 1
    r = sp.symbols("r", positive=True)
    M = sp.Rational(5, 7)
    ys = sp.symbols(f"y0:{m}", real=True)
    s2 = sum(y * y for y in ys)
    c = 4 / (1 + s2) ** 2
    dim = n_real
    g = sp.zeros(dim, dim)
    g[0, 0] = 1 / (1 - 2 * M / r ** (n_real - 2))
    for a in range(m):
        g[1 + a, 1 + a] = r ** 2 * c
    coords = (r,) + ys
    R = scalar_curvature(g, coords)
    import random
    random.seed(3)
    for _ in range(3):
        subs = {r: sp.Rational(random.randint(5, 9), random.randint(1, 2))}
        subs.update({y: sp.Rational(random.randint(-2, 2), random.randint(3, 7)) for y in ys})
        val = sp.simplify(R.subs(subs))
        assert val == 0, f"Schwarzschild slice not scalar flat (n={n_real}): {val}"


# ---------------------------------------------------------------------------
# radial Kahler potentials: boundary mass densities
# ---------------------------------------------------------------------------

def potential_mass_limit(n, phi, c, s):
    """Boundary mass density  -F' s^{2n-1} (phi'/s)^{n-1} / (2n-1)  with
    F = log( (phi'/s)^{n-1} (phi'' + phi'/s) / 2 ), and its limit s -> oo.

    The density equals twice the classical coordinate ADM normalization of the
    same family; both values are reported.
    """
    dphi = sp.diff(phi, s)
    d2phi = sp.diff(phi, s, 2)
    F = sp.log((dphi / s) ** (n - 1) * (d2phi + dphi / s) / 2)
    dens = -sp.diff(F, s) * s ** (2 * n - 1) * (dphi / s) ** (n - 1) / (2 * n - 1)
    lim = sp.limit(sp.series(dens, c, 0, 2).removeO(), s, sp.oo)
    return sp.simplify(lim)


# ---------------------------------------------------------------------------
# obstruction forms on C^2 \ {0}
# ---------------------------------------------------------------------------

def check_obstruction_forms():
    z1, z2 = sp.symbols("z1 z2")
    b1, b2 = sp.symbols("zb1 zb2")  # stand-ins for conjugates; independent vars
    r2 = z1 * b1 + z2 * b2
    # components (P1, P2) of P1 dzbar1 + P2 dzbar2
    forms = {
        "xi_m3": (b2 / r2 ** 2, -b1 / r2 ** 2),
        "xi_m4_1": (b1 * b2 / r2 ** 3, -b1 ** 2 / r2 ** 3),
        "xi_m4_2": (b2 ** 2 / r2 ** 3, -b1 * b2 / r2 ** 3),
    }
    for name, (P1, P2) in forms.items():
        dbar = sp.simplify(sp.diff(P2, b1) - sp.diff(P1, b2))
        dbar_star = sp.simplify(sp.diff(P1, z1) + sp.diff(P2, z2))
        assert dbar == 0, f"{name}: dbar residual {dbar}"
        assert dbar_star == 0, f"{name}: dbar* residual {dbar_star}"


# ---------------------------------------------------------------------------
# main
# ---------------------------------------------------------------------------

def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--emit", action="store_true", help="write fixture JSON files")
    ap.add_argument("--fast", action="store_true", help="skip the heavier checks")
    args = ap.parse_args()

    here = os.path.dirname(os.path.abspath(__file__))
    fixdir = os.path.normpath(os.path.join(here, "..", "crates", "conekit", "fixtures"))

    plan = {3: {"K": 32, "rank_check": 6, "eig_check": 3},
            5: {"K": 16, "rank_check": 3, "eig_check": 2}}
    if args.fast:
        plan = {3: {"K": 32, "rank_check": 3, "eig_check": 1},
                5: {"K": 16, "rank_check": 2, "eig_check": 1}}

    for m, cfg in plan.items():
        nv = m + 1
        print(f"== S^{m}: coclosed 1-form spectrum")
        levels = []
        for d in range(1, cfg["K"] + 1):
            lam = (d + 1) * (d + m - 2)
            mult_closed = nv * harm_dim(nv, d) - harm_dim(nv, d + 1) - harm_dim(nv, d - 1)
            levels.append((d, lam, int(mult_closed)))
        # exact rank verification on the low levels
        for d in range(1, cfg["rank_check"] + 1):
            mult, h = coclosed_multiplicity(m, d)
            expect = levels[d - 1][2]
            status = "ok" if mult == expect else "MISMATCH"
            print(f"   d={d}: rank-based mult={mult}, closed-form={expect}  [{status}]")
            assert mult == expect
        for d in range(1, cfg["eig_check"] + 1):
            lam = check_eigenform(m, d)
            print(f"   d={d}: Hodge eigenvalue verified symbolically: lambda''={lam}")
        if args.emit:
            data = {
                "dim_link": m,
                "description": "coclosed 1-form spectrum of the round unit sphere",
                "method": "tangential harmonic polynomial 1-forms; multiplicities by "
                          "exact integer rank, eigenvalues verified via symbolic Hodge "
                          "Laplacian in a stereographic chart at rational sample points",
                "verified_rank_levels": cfg["rank_check"],
                "verified_eigen_levels": cfg["eig_check"],
                "modes": [[lam, mult] for (_, lam, mult) in levels],
            }
            os.makedirs(fixdir, exist_ok=True)
            path = os.path.join(fixdir, f"sphere_coclosed_m{m}.json")
            with open(path, "w") as f:
                json.dump(data, f, indent=1)
            print(f"   wrote {path}")

    print("== Schwarzschild spatial slices are scalar flat")
    for n_real in (3, 4):
        check_schwarzschild(n_real)
        print(f"   n_real={n_real}: R == 0 at exact sample points")

    print("== radial potential boundary-mass limits")
    s, c = sp.symbols("s c", positive=True)
    m2 = potential_mass_limit(2, s ** 2 / 2 + c * sp.log(s), c, s)
    print(f"   n=2, u = s^2/2 + c log s      -> mass {m2}   (classical ADM of the family: c/3)")
    assert sp.simplify(m2 - sp.Rational(2, 3) * c) == 0
    m3 = potential_mass_limit(3, s ** 2 / 2 + c * s ** -2, c, s)
    print(f"   n=3, u = s^2/2 + c s^-2       -> mass {m3}   (classical ADM of the family: -4c/5)")
    assert sp.simplify(m3 + sp.Rational(8, 5) * c) == 0

    print("== explicit obstruction (0,1)-forms are dbar- and dbar*-closed")
    check_obstruction_forms()
    print("   xi_-3, xi_-4,1, xi_-4,2: ok")

    print("all oracle checks passed")


if __name__ == "__main__":
    main()
