"""Smoke test for the flowcut_py extension: run from the repository root after installing it."""

from fractions import Fraction
from pathlib import Path

import flowcut_py as fc

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def main():
    inst = fc.Instance.load(str(CORPUS / "gap_witness.json"))
    inst.validate()
    assert inst.graph.n == 14 and inst.graph.is_outerplanar()

    eps = fc.mcf(inst)
    assert eps == Fraction(5, 7), eps
    assert abs(float(fc.mcf(inst, exact=False)) - 5 / 7) < 1e-9
    sep, phi = fc.sparsest_cut(inst)
    assert phi == 1 and sep, (sep, phi)
    d = fc.dual(inst)
    assert d["objective"] == d["epsilon"] == eps

    g = fc.Graph(6, [(i, (i + 1) % 6, 1) for i in range(6)])
    assert g.distance(0, 3) == 3
    tm = fc.embed(g, seed=4)
    assert tm.is_lipschitz() and tm.is_star_shaped()
    assert all(tm.distance(u, v) <= g.distance(u, v) for u in range(6) for v in range(6))
    th = fc.thin(g, seed=4)
    assert th.thinness() <= 4 and th.is_lipschitz()
    assert fc.distortion(g, samples=100, seed=1) >= 1 / 960

    wheel = fc.Instance.load(str(CORPUS / "wheel6.json"))
    rep = fc.gap(wheel, samples=4, seed=7)
    assert rep["schema"] == "flowcut.report/1" and Fraction(rep["ratio"]) >= 1, rep

    found, ratio = fc.search_gap(seed=1)
    assert ratio >= Fraction(7, 5), ratio
    again = fc.Instance.from_json(found.to_json())
    assert fc.mcf(again) == Fraction(5, 7)

    try:
        fc.embed(wheel.graph)
    except ValueError as e:
        assert "outerplanar" in str(e)
    else:
        raise AssertionError("wheel is not outerplanar")
    print("flowcut_py smoke test passed")


if __name__ == "__main__":
    main()
