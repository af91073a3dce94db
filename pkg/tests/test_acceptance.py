"""
Acceptance checks, one per criterion, each at its stated tolerance and time
budget. Every check prints a single PASS/FAIL line (visible with ``pytest -v``
or when the module is run as a script).
"""

import math
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from semihelix import presets
from semihelix.cli import main as cli_main
from semihelix.construct import (
    SemiHelixSpec,
    build_product_surface,
    check_immersion_rank,
    chord,
    t_theta,
    verify_semihelix,
    xi_theta,
)
from semihelix.curves import ClosedFormArc, closed_form_arc_eval, fit_circle, theta_linearity, trace_curves
from semihelix.euclid import AngleWindow
from semihelix.inverse import OrientedPointCloud, fit_direction
from semihelix.reconstruct import reconstruct_local
from semihelix.suite import preset_suite
from semihelix.surface import SampleGrid, orient_normal_field

from conftest import literal_chord

pytestmark = pytest.mark.acceptance

E3 = np.array([0.0, 0.0, 1.0])
SEED = 20241019


def emit(number, title, ok, detail, elapsed, budget=None):
    timing = f"{elapsed:.2f}s" + (f" / {budget:g}s" if budget else "")
    line = f"ACCEPTANCE {number} {'PASS' if ok else 'FAIL'} {title}: {detail} [{timing}]"
    print(line, flush=True)
    return line


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


# -- 1 ---------------------------------------------------------------------------


def check_frame_identities():
    rng = np.random.default_rng(SEED)
    bases = [presets.plane(2), presets.circle(1.0), presets.graph(0.3, 2)]
    worst = 0.0
    with Timer() as tm:
        for base in bases:
            spec = SemiHelixSpec(base, 1.0, AngleWindow(0.0, 1.0))
            n = 10_000 // len(bases) + 1
            u = rng.uniform(base.lower, base.upper, size=(n, base.k))
            th = rng.uniform(-math.pi, math.pi, size=n)
            eta = spec.eta(u)
            T, X = t_theta(eta, spec.d, th), xi_theta(eta, spec.d, th)
            errs = [
                np.linalg.norm(T, axis=1) - 1,
                np.linalg.norm(X, axis=1) - 1,
                np.einsum("ij,ij->i", X, T),
                X @ spec.d - np.sin(th),
            ]
            worst = max(worst, max(float(np.max(np.abs(e))) for e in errs))
    ok = worst < 1e-12 and tm.elapsed < 1.0
    return ok, f"max identity error {worst:.2e} (< 1e-12) over 3 bases", tm.elapsed, 1.0


# -- 2 ---------------------------------------------------------------------------


def check_chord_identity():
    rng = np.random.default_rng(SEED + 1)
    eta, d = np.array([1.0, 0.0, 0.0]), E3
    th = np.linspace(-math.pi + 0.01, math.pi - 0.01, 4001)
    radii = rng.uniform(0.1, 3.0, size=th.size)
    with Timer() as tm:
        lhs = radii[:, None] * chord(eta, d, 1.0, th)
        rhs = (radii * (1 - np.cos(th)))[:, None] * eta + (radii * np.sin(th))[:, None] * d
        expanded = float(np.max(np.abs(lhs - rhs)))
    # the literal square-root form is the oracle here; it is evaluated in high
    # precision because 1 - cos(theta) cancels in double precision near 0
    pos = np.flatnonzero(th >= 0)[::4]
    pos = np.union1d(pos, np.flatnonzero(th >= 0)[:5])
    literal = np.array([literal_chord(radii[i], th[i], eta, d) for i in pos])
    tiny = np.array([1e-9, 1e-6, 1e-3])
    tiny_err = max(float(np.max(np.abs(chord(eta, d, 1.0, t) - literal_chord(1.0, t, eta, d)))) for t in tiny)
    literal_err = max(float(np.max(np.abs(lhs[pos] - literal))), tiny_err)
    ok = expanded < 1e-12 and literal_err < 1e-12 and tm.elapsed < 1.0
    detail = f"expanded-form error {expanded:.2e}, literal-form error (theta >= 0) {literal_err:.2e} (< 1e-12)"
    return ok, detail, tm.elapsed, 1.0


# -- 3 ---------------------------------------------------------------------------


def check_certification():
    worst_a = worst_fd = 0.0
    all_inside = True
    with Timer() as tm:
        for _, spec in preset_suite():
            s = build_product_surface(spec)
            grid = SampleGrid.over(s, (128, 65))
            for chart, kind in ((s, "a"), (s.with_fd(), "fd")):
                rep = verify_semihelix(chart, spec.d, spec.window, grid)
                all_inside &= rep.passed and not rep.rank_deficient
                if kind == "a":
                    worst_a = max(worst_a, rep.max_param_error)
                else:
                    worst_fd = max(worst_fd, rep.max_param_error)
    ok = worst_a < 1e-9 and worst_fd < 1e-6 and all_inside and tm.elapsed < 30
    detail = (f"12 specs at 128x65: analytic {worst_a:.2e} (< 1e-9), FD {worst_fd:.2e} (< 1e-6), "
              f"all angles strictly inside: {all_inside}")
    return ok, detail, tm.elapsed, 30.0


# -- 4 ---------------------------------------------------------------------------


def check_circle_sections():
    stats = dict(dev=0.0, radius=0.0, slope=0.0, lin=0.0, planar=0.0, center=0.0, speed=0.0)
    n_curves = 0
    with Timer() as tm:
        for _, spec in preset_suite():
            s = build_product_surface(spec)
            r, w = spec.r, spec.window
            margin = 0.05 * w.epsilon
            th_start = w.lower + margin
            span = r * (2 * w.epsilon - 2 * margin)  # one full traversal of the window
            ub = spec.base.lower + spec.base.extent * np.array([[0.2], [0.45], [0.7], [0.9]])
            U0 = np.column_stack([ub, np.full(len(ub), th_start)])
            for u, curve in zip(ub, trace_curves(s, U0, span, 1e-3, spec.d)):
                n_curves += 1
                x, eta = spec.base_point(u), spec.eta(u)
                arc = ClosedFormArc.from_construction(x, eta, spec.d, r, th_start)
                ref = closed_form_arc_eval(arc, curve.t)
                stats["dev"] = max(stats["dev"], float(np.max(np.linalg.norm(ref - curve.points, axis=1))))
                fit = fit_circle(curve.points)
                stats["radius"] = max(stats["radius"], abs(fit.radius - r))
                stats["planar"] = max(stats["planar"], fit.planarity_rms)
                stats["center"] = max(stats["center"], float(np.linalg.norm(fit.center - (x + r * eta))))
                a, _, resid = theta_linearity(curve)
                stats["slope"] = max(stats["slope"], abs(a - 1 / r))
                stats["lin"] = max(stats["lin"], resid)
                speed = np.linalg.norm(np.diff(curve.points, axis=0), axis=1) / np.abs(np.diff(curve.t))
                stats["speed"] = max(stats["speed"], float(np.max(np.abs(speed - 1))))
    limits = dict(dev=1e-8, radius=1e-6, slope=1e-6, lin=1e-6, planar=1e-8, center=1e-6, speed=1e-6)
    ok = all(stats[k] < limits[k] for k in limits) and tm.elapsed < 10
    detail = f"{n_curves} curves; " + ", ".join(f"{k} {stats[k]:.1e}" for k in limits)
    return ok, detail, tm.elapsed, 10.0


# -- 5 ---------------------------------------------------------------------------


def check_round_trip():
    rng = np.random.default_rng(SEED + 5)
    worst_r = worst_res = worst_h = 0.0
    failures = []
    with Timer() as tm:
        for label, spec in preset_suite():
            s = build_product_surface(spec)
            for u in s.lower + s.extent * rng.uniform(0.15, 0.85, size=(3, s.k)):
                rep = reconstruct_local(s, u, spec.d)
                if rep.errors or rep.r_hat is None or rep.hausdorff is None:
                    failures.append(f"{label}@{np.round(u, 3).tolist()}")
                    continue
                worst_r = max(worst_r, abs(rep.r_hat - spec.r) / spec.r)
                res = [rep.residual_p] + [smp.residual for smp in rep.neighborhood]
                worst_res = max(worst_res, max(res))
                worst_h = max(worst_h, rep.hausdorff)
    ok = not failures and worst_r < 1e-4 and worst_res < 1e-6 and worst_h < 1e-5 and tm.elapsed < 60
    detail = (f"36 points: relative r error {worst_r:.1e} (< 1e-4), residual {worst_res:.1e} (< 1e-6), "
              f"Hausdorff {worst_h:.1e} (< 1e-5), failed points {len(failures)}")
    return ok, detail, tm.elapsed, 60.0


# -- 6 ---------------------------------------------------------------------------


def check_degenerate_cases():
    with Timer() as tm:
        cyl = presets.cylinder(1.0)
        rc = verify_semihelix(cyl, E3, AngleWindow(0.0, 0.0), SampleGrid.over(cyl, (64, 9)))
        cyl_angle = max(abs(rc.angle_min), abs(rc.angle_max))
        cyl_ok = rc.passed and cyl_angle < 1e-9

        pl = presets.plane(3)
        rp = verify_semihelix(pl, E3, AngleWindow(0.0, math.pi / 6), SampleGrid.over(pl, 8))
        plane_ok = (not rp.passed) and abs(rp.angle_min - math.pi / 2) < 1e-12 and abs(rp.angle_max - math.pi / 2) < 1e-12

        spec = SemiHelixSpec(presets.flipped(presets.circle(1.0)), 5.0, AngleWindow(0.0, math.pi / 3))
        s = build_product_surface(spec)
        rank = check_immersion_rank(s, SampleGrid.over(s, (64, 33)))
        rank_ok = rank.below_gate
    ok = cyl_ok and plane_ok and rank_ok and tm.elapsed < 5
    detail = (f"cylinder max |angle| {cyl_angle:.1e} passed={rc.passed}; plane angle {rp.angle_min:.6f} "
              f"passed={rp.passed}; inward r=5 sigma ratio {rank.ratio:.1e} below gate={rank.below_gate}")
    return ok, detail, tm.elapsed, 5.0


# -- 7 ---------------------------------------------------------------------------


def _cloud(s, counts, R=None):
    f = orient_normal_field(s, SampleGrid.over(s, counts), E3)
    P, N = f.points.reshape(-1, s.m), f.normals.reshape(-1, s.m)
    if R is not None:
        P, N = P @ R.T, N @ R.T
    return OrientedPointCloud(P, N)


def check_inverse_fit():
    rng = np.random.default_rng(SEED + 7)
    worst_d = worst_spread0 = 0.0
    worst_excess = -np.inf
    with Timer() as tm:
        rotations = [np.eye(3)] + [Rotation.random(random_state=rng).as_matrix() for _ in range(3)]
        for R in rotations:
            fit = fit_direction(_cloud(presets.cylinder(1.0), (48, 5), R))
            true_d = R @ E3
            worst_d = max(worst_d, math.acos(min(1.0, abs(float(fit.d @ true_d)))))
            worst_spread0 = max(worst_spread0, fit.spread)
        for _, spec in preset_suite():
            fit = fit_direction(_cloud(build_product_surface(spec), (24, 13)))
            worst_excess = max(worst_excess, fit.spread - spec.window.epsilon)
    ok = worst_d < 1e-4 and worst_spread0 < 1e-6 and worst_excess <= 1e-6 and tm.elapsed < 5
    detail = (f"eps=0 clouds: axis error {worst_d:.1e} rad (< 1e-4), spread {worst_spread0:.1e} (< 1e-6); "
              f"12 constructed clouds: max(spread - eps) {worst_excess:.1e} (<= 1e-6)")
    return ok, detail, tm.elapsed, 5.0


# -- 8 ---------------------------------------------------------------------------

CLI_RUNS = [
    ("build", "n = 3\nbase = circle(1)\nr = 1\nepsilon = pi/6\nseed = 3\n", []),
    ("build", "n = 4\nbase = torus(2, 0.5)\nr = 0.5\nepsilon = 0.3\n", ["--grid", "6,6,5"]),
    ("verify", "n = 3\nbase = circle(1)\nr = 1\nepsilon = pi/6\n", []),
    ("verify", "n = 3\nbase = plane\ntarget = base\nepsilon = pi/6\n", ["--grid", "8"]),
    ("trace", "n = 3\nbase = graph(0.3)\nr = 0.5\nepsilon = pi/4\n", ["--span", "0.3", "--step", "1e-3"]),
    ("reconstruct", "n = 3\nbase = circle(1)\nr = 0.25\ntheta0 = pi/12\nepsilon = pi/24\n", ["--seed", "5"]),
    ("fit-direction", "n = 3\nbase = circle(1)\nr = 1\nepsilon = pi/6\n", []),
]


def check_determinism():
    mismatches, n_files = [], 0
    with Timer() as tm, tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        for i, (cmd, text, extra) in enumerate(CLI_RUNS):
            cfg = tmp / f"{i}.cfg"
            cfg.write_text(text)
            outs = []
            for rep in ("a", "b"):
                out = tmp / f"{i}{rep}"
                status = cli_main([cmd, "--config", str(cfg), "--out", str(out), *extra])
                outs.append((status, {p.name: p.read_bytes() for p in sorted(out.iterdir())}))
            (sa, fa), (sb, fb) = outs
            n_files += len(fa)
            if sa != sb or fa != fb or not fa:
                mismatches.append(f"{cmd}#{i}")
    ok = not mismatches
    detail = f"{len(CLI_RUNS)} command runs x2, {n_files} files byte-identical; mismatches: {mismatches or 'none'}"
    return ok, detail, tm.elapsed, None


CHECKS = [
    (1, "frame identities", check_frame_identities),
    (2, "chord identity", check_chord_identity),
    (3, "certification suite", check_certification),
    (4, "integral curves are circle sections", check_circle_sections),
    (5, "local reconstruction round trip", check_round_trip),
    (6, "degenerate and helix cases", check_degenerate_cases),
    (7, "inverse direction fit", check_inverse_fit),
    (8, "CLI determinism", check_determinism),
]


@pytest.mark.parametrize("number,title,check", CHECKS, ids=[f"criterion{c[0]}" for c in CHECKS])
def test_acceptance(number, title, check, capsys):
    ok, detail, elapsed, budget = check()
    with capsys.disabled():
        print()
        emit(number, title, ok, detail, elapsed, budget)
    assert ok, detail


if __name__ == "__main__":
    results = []
    for number, title, check in CHECKS:
        ok, detail, elapsed, budget = check()
        emit(number, title, ok, detail, elapsed, budget)
        results.append(ok)
    raise SystemExit(0 if all(results) else 1)
