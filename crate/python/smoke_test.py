"""Smoke test for the pysimplexkit extension module.

Build and install with
    pip install --no-build-isolation ./crates/python
then run
    python python/smoke_test.py
"""

import math

import pysimplexkit as sk


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    cube = sk.Body.cube(3)
    assert cube.dim == 3 and cube.kind == "cube"
    assert cube.contains([0.1, -0.2, 0.4])
    assert not cube.contains([0.6, 0.0, 0.0])
    assert close(cube.support([1.0, 0.0, 0.0]), 0.5, 1e-12)
    assert close(cube.volume(), 1.0, 1e-12)

    pts = cube.sample(500, seed=3)
    assert len(pts) == 500 and all(max(abs(x) for x in p) <= 0.5 for p in pts)
    assert pts == cube.sample(500, seed=3)

    ball = sk.Body.from_json('{"kind": "ball", "dim": 2, "radius": 1.0}')
    assert close(ball.volume(), math.pi, 1e-12)

    for n in range(2, 6):
        t = sk.Simplex.standard_centered(n)
        assert close(t.volume() * t.polar().volume(), sk.mahler_product(n), 1e-9)

    report = sk.construct(cube, trials=200, seed=1)
    assert report["aggregates"]["trials"] == 200
    assert 0.0 <= report["aggregates"]["success_rate"] <= 1.0

    poly = sk.Body.vpolytope([[1, 0], [0, 1], [-1, 0.2], [-0.3, -1]])
    res = sk.enclose(poly, trials=200, seed=2)
    assert res["contains"] and res["ratio"] >= 1.0
    assert res["eqb_residual"] < 1e-3
    s = sk.Simplex(res["vertices"])
    assert s.contains_body(poly)

    vs, vb, norm = sk.reference_ball(2)
    assert close(vs, 3 * math.sqrt(3), 1e-12) and close(vb, math.pi, 1e-12)
    assert close(sk.reference_cube(2), math.sqrt(2), 1e-12)

    tri = sk.Simplex(sk.min_enclosing_triangle([[0, 0], [1, 0], [1, 1], [0, 1]]))
    assert close(tri.volume(), 2.0, 1e-6)

    csv = sk.sweep([2], bodies=["cube"], trials=50, seed=0)
    assert csv.splitlines()[0] == "# schema: sweep-v1"

    try:
        sk.Body.from_json('{"kind": "torus", "dim": 2}')
    except ValueError:
        pass
    else:
        raise AssertionError("bad body accepted")

    print("pysimplexkit", sk.__version__, "smoke test ok")


if __name__ == "__main__":
    main()
