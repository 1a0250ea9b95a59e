"""Smoke test for the rectfree_py extension.

Build and install first:

    pip install --no-build-isolation ./crates/py
"""

import json
import math

import rectfree_py as rf


def main():
    b = rf.SymmetricMeasure.bernoulli()
    assert abs(b.moment(2) - 1.0) < 1e-12

    semi = rf.rect_gaussian(1.0)
    assert abs(semi.density_at(0.0) - 1.0 / math.pi) < 1e-6
    assert abs(semi.moment(4) - 2.0) < 1e-6

    lam = 0.5
    assert rf.moments_from_rect_cumulants(lam, [1.0, 0.0, 0.0]) == [1.0, 1.5, 2.75]

    conv = rf.rect_convolve(b, b, 1.0)
    assert abs(conv.moment(2) - 2.0) < 1e-5
    assert abs(conv.moment(4) - 6.0) < 1e-4

    g = rf.LevyMeasure.dirac_zero(1.0)
    law = rf.bercovici_pata(g, lam)
    assert abs(law.moment(4) - 1.5) < 1e-4

    assert len(rf.noncrossing_partitions(4)) == 14
    assert rf.mp_moment(1.0, 4) == 14.0

    roundtrip = rf.SymmetricMeasure.from_json(law.to_json())
    assert roundtrip.moment(6) == law.moment(6)

    try:
        rf.rect_gaussian(2.0)
    except ValueError:
        pass
    else:
        raise AssertionError("lambda = 2 must be rejected")

    config = {"d": 20, "d_prime": 40, "lambda_target": 0.5, "trials": 10, "seed": 1, "kind": {"kind": "gaussian"}}
    report = json.loads(rf.mc_compare(json.dumps(config), rf.rect_gaussian(0.5)))
    assert abs(report["moments"][0]["mean"] - 1.0) < 0.1

    print("smoke test passed")


if __name__ == "__main__":
    main()
