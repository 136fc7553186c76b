"""Smoke test for the scri_py extension. Run with pytest or directly."""

import math

import scri_py


def test_version():
    assert scri_py.version().startswith("scri ")


def test_kerr_constants():
    c = scri_py.kerr_constants(1.0, 0.5)
    assert abs(c["m"] - 4.0) < 1e-10
    assert abs(c["omega"] - 1.0) < 1e-10
    assert abs(c["alpha"] - 2.0) < 1e-10
    assert abs(c["beta"] - 4.0) < 1e-10


def test_resonance_sets():
    s = scri_py.resonance_sets(["0,-1,0"], True, 3.5)
    top = {}
    for _, re, im, k in s["e_scri"]:
        top[(re, im)] = max(k, top.get((re, im), 0))
    assert top == {(0.0, 0.0): 0, (0.0, -1.0): 2, (0.0, -2.0): 4, (0.0, -3.0): 6}
    try:
        scri_py.resonance_sets(["0,-1"])
    except ValueError:
        pass
    else:
        raise AssertionError("malformed resonance accepted")


def test_convergence_and_oracle():
    rows = scri_py.convergence([1 / 8, 1 / 16, 1 / 32])
    orders = [o for *_, o in rows if o is not None]
    assert len(orders) == 2 and min(orders) > 1.9
    u1, = scri_py.minkowski_exact([(10.0, 10.0)])
    u2, = scri_py.minkowski_exact([(10.0, 10.0)], amplitude=2.0)
    assert math.isclose(u2, 2 * u1, rel_tol=1e-10)


def test_tortoise_slices():
    slices = scri_py.tortoise_slices(0.0, -20.0, 0.0, 4.0)
    assert [s for s, _, _ in slices] == [-20.0, -16.0, -12.0, -8.0, -4.0, 0.0]
    scale = max(abs(x) for _, _, w in slices for x in w)
    for s, rho, w in slices:
        assert len(rho) == len(w) > 8
        assert max(w) - min(w) <= 1e-6 * scale


if __name__ == "__main__":
    for name, f in list(globals().items()):
        if name.startswith("test_"):
            f()
            print("ok", name)
