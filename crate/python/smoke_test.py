#!/usr/bin/env python3
"""Smoke test for the halfline_py extension module.

Builds nothing itself: it locates the compiled cdylib under target/ (debug
or release), exposes it under the importable module name via a symlink in a
temp directory, and exercises the main operations.

Usage:
    cargo build -p halfline-py [--release]
    python3 python/smoke_test.py
"""

import math
import sys
import tempfile
from pathlib import Path


def locate_module() -> Path:
    root = Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libhalfline_py.so", "halfline_py.so", "libhalfline_py.dylib")
    ]
    for path in candidates:
        if path.exists():
            return path
    sys.exit("halfline_py cdylib not found; run `cargo build -p halfline-py` first")


def main() -> None:
    lib = locate_module()
    tmp = tempfile.mkdtemp(prefix="halfline_py_")
    (Path(tmp) / "halfline_py.so").symlink_to(lib)
    sys.path.insert(0, tmp)
    import halfline_py as hl

    params = hl.Params(0.5, 1.25)
    assert params.a == 0.5 and params.b == 1.25

    # Word composition: T0 then T1 on x=1 gives b*(a*1) + 1.
    slope, intercept = hl.compose_word("01", params)
    assert math.isclose(slope, 0.625) and math.isclose(intercept, 1.0)
    assert hl.orbit("01", 1.0, params) == [1.0, 0.5, 1.625]

    # Lyapunov sign decides existence; moments match the solver.
    assert hl.lyapunov(0.6, params) < 0.0
    mu = hl.stationary(0.6, params, grid=2**14)
    assert mu.residual <= 1e-6
    assert abs(mu.moment(1) - hl.stationary_moment(0.6, params, 1)) < 0.01
    assert abs(mu.moment(1) - 2.0) < 0.01
    assert 0.0 <= mu.cdf(1.0) <= mu.cdf(3.0) <= 1.0
    q = mu.quantile(0.5)
    assert abs(mu.cdf(q) - 0.5) < 1e-3

    # Sphere and path averages agree on the mean.
    atoms = hl.sphere_avg(0.6, 1.0, 16, params)
    assert len(atoms) == 2**16
    sphere_mean = sum(x * w for x, w in atoms)
    path_mean = hl.path_avg_mean(0.6, 1.0, 200_000, 11, params)
    assert abs(sphere_mean - path_mean) < 0.1

    # Steering lands within tolerance.
    wide = hl.Params(0.5, 1.5)
    res = hl.steer_word(1.0, 10.0, 0.1, wide)
    assert res["error"] < 0.1
    assert set(res["word"]) <= {"0", "1"}

    # Universal sequence honours both per-element inequalities.
    for i, (_, _, _, error, slope) in enumerate(hl.approx_words(50, 3, wide), start=1):
        assert error < 1.0 / i and slope < 1.0 / i

    # Certificate word maps [0, 1/a] into the requested interval.
    cert = hl.holder_cert(10.0, 0.1, 0.5, wide)
    lo, hi = cert["image"]
    assert 9.95 <= lo <= hi <= 10.05
    assert cert["length_bound_holds"]

    # Rotation number: closed form vs iteration.
    formula, numeric = hl.rotation(wide, iters=200_000)
    assert abs(formula - numeric) < 1e-4

    # Exact coincidence at (1/2, 4/3).
    classes = hl.coincidences(5, hl.Params.exact(1, 2, 4, 3))
    assert len(classes) == 1
    assert sorted(classes[0][2]) == ["00110", "10001"]

    # Ulam density of the interval map.
    density = hl.acim(2.0, wide, bins=512)
    assert abs(sum(density["mass"]) - 1.0) < 1e-9
    assert density["residual"] <= 1e-8
    assert density["lyapunov"] < 0.0

    # Coupled orbits contract monotonically in log distance.
    table = hl.contraction_table(1.0, 5.0, "0110100110", wide)
    logs = [row[0] for row in table]
    assert all(b <= a for a, b in zip(logs, logs[1:]))

    print("smoke test passed:", len(table), "contraction rows,", len(atoms), "sphere atoms")


if __name__ == "__main__":
    main()
