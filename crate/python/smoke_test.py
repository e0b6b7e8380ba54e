"""Smoke test for the hypodense_py extension."""

import json
from fractions import Fraction

import hypodense_py as hd


def main():
    q = Fraction(hd.density_quotient("evens", "unit", 10))
    assert q == Fraction(1, 2), q
    assert hd.duality_check("quartic_blocks", "harmonic", 5000)

    r = hd.estimate_densities("evens", "unit", 1000)
    assert Fraction(r["lower"]) <= Fraction(1, 2) <= Fraction(r["upper"]), r

    alphas = hd.alpha_sequence("harmonic", 10)
    assert len(alphas) == 10 and alphas == sorted(alphas) and alphas[0] >= 1, alphas

    passed, body, summary = hd.run(["verify", "--suite", "densities", "--seed", "3", "--trials", "5"])
    report = json.loads(body)
    assert passed and report["pass"] and report["seed"] == 3, summary

    try:
        hd.density_quotient("not a set", "unit", 10)
    except ValueError:
        pass
    else:
        raise AssertionError("malformed set accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
