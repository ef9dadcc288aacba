"""Smoke test for the pycubicstat extension module.

Build and install it first:

    pip install --no-build-isolation ./crates/cubicstat-py
"""

from fractions import Fraction

import pycubicstat as cs


def main():
    orbits = cs.enumerate_orbits(1000, -1)
    fields = [o for o in orbits if o[6] and cs.is_maximal(o[:4])]
    discs = sorted({o[4] for o in fields}, reverse=True)
    assert discs[:3] == [-23, -31, -44], discs[:3]
    assert cs.discriminant((1, 1, 2, 1)) == -23

    l_one, tail = cs.central_value((1, 1, 2, 1))
    l_gauss, _ = cs.central_value((1, 1, 2, 1), kernel="gaussian")
    assert abs(l_one - l_gauss) < 1e-8 and tail < 1e-10

    # Entries of the transform matrix are exact with p-power denominators.
    m = [[Fraction(x) for x in row] for row in cs.mori_matrix(5)]
    assert len(m) == 6 and all(len(r) == 6 for r in m)
    assert all(625 % x.denominator == 0 for r in m for x in r)
    assert all(cs.orthogonality_holds(p) for p in (5, 7, 11))

    c, c_prime = cs.family_constants("-1;127:3", 100_000)
    assert c > 0

    try:
        cs.family_constants("-1;4:3")
    except ValueError:
        pass
    else:
        raise AssertionError("4 is not prime")

    print(f"pycubicstat {cs.__version__}: {len(orbits)} orbits, {len(fields)} fields below 1000")
    print(f"L(1/2) for disc -23: {l_one:.12f};  C = {c:.6f}, C' = {c_prime:.6f}")


if __name__ == "__main__":
    main()
