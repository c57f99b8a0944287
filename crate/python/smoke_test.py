"""Smoke test for the sobolev_lab_py extension module.

Build and place the module next to this script, then run it:

    cargo build --release -p sobolev-lab-py --features extension-module
    cp target/release/libsobolev_lab_py.so python/sobolev_lab_py.so
    python3 python/smoke_test.py
"""

import cmath
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import sobolev_lab_py as lab


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b, tol)


def torus_checks():
    n = 64
    idx = lab.SobolevIndex(2, 2.0, strict=False)
    one = lab.TorusField.constant(n, [1.5, -0.5])
    close(one.norm(idx), math.sqrt(2.5 * 4 * math.pi ** 2), 1e-10)
    values = [math.sin(2 * math.pi * i / n) for _ in range(n) for i in range(n)]
    sine = lab.TorusField(n, 1, values)
    close(sine.norm(lab.SobolevIndex(1, 2.0, strict=False)), 2 * math.pi, 1e-10)
    translation = lab.Family("translation")
    flipped = sine.compose(translation, [math.pi, 0.0])
    assert flipped.max_abs_diff(lab.TorusField(n, 1, [-v for v in values])) < 1e-12
    close(sine.evaluate([math.pi / 2, 0.3])[0], 1.0, 1e-10)
    eta = lab.TorusField.synth(9.0, 4, n, 2)
    order = lab.derivative_order(lab.Family("shear-bump"), eta, lab.SobolevIndex(3, 2.0, strict=False), 2, [1e-2, 3e-3, 1e-3])
    assert order >= 1.8, order
    g = lab.TorusField.synth(6.0, 3, 128, 2)
    assert lab.evaluation_identity_gap(g, [2.0, 3.5], [2.2, 3.4], 1.5) < 1e-8
    try:
        lab.SobolevIndex(1, 2.0)
    except lab.SobolevLabError:
        pass
    else:
        raise AssertionError("strict index with p = 2 must be rejected")


def mobius_checks():
    flip = lab.MobiusElement.from_triple(1, 0, None)
    close(flip.apply(0.25), 0.75, 1e-15)
    assert flip.apply(None) is None
    g = lab.MobiusElement.sample(7, 0.05)
    assert g.distance_to_identity() <= 0.05
    assert g.compose(g.inverse()).distance(lab.MobiusElement.identity()) < 1e-12
    assert abs(g.det() - 1) < 1e-12


def sphere_checks():
    f = lab.SphereField.standard_center()
    assert f.overlap_mismatch() < 1e-8
    sl = lab.Slice(f)
    g = lab.MobiusElement.sample(3, 0.05)
    k = f.compose_mobius(g)
    gamma_inv, projected, iterations = sl.project(k)
    assert gamma_inv.distance(g.inverse()) < 1e-8
    assert iterations <= 12
    assert sl.residual(projected) < 1e-9
    idx = lab.SobolevIndex(2, 4.0)
    xi0 = lab.SphereField.random_direction(f.n, 4, 17)
    lhs = sl.extend_constant(xi0, k.compose_mobius(g), idx)
    rhs = sl.extend_constant(xi0, k, idx).compose_mobius(g)
    assert lhs.max_abs_diff(rhs) < 1e-6
    assert sl.cutoff(f, 0.1, 0.2, idx) == 1.0


def harness_checks():
    assert "slice-roundtrip" in lab.default_config("slice-roundtrip")
    passed, rows = lab.run_suite("slice-roundtrip", "samples = 2\nmobius_scale = 0.0\n")
    assert passed and len(rows) == 10
    assert all(r["value"] == 0.0 for r in rows if r["metric"] != "newton-iterations")


if __name__ == "__main__":
    for check in (torus_checks, mobius_checks, sphere_checks, harness_checks):
        check()
        print(f"ok {check.__name__}")
    print("smoke test passed")
