"""Regenerate tests/fixtures/oracle.json with 60-digit mpmath arithmetic.

Run from the repository root::

    python tests/oracle/generate_fixtures.py

Nothing here imports the package under test.
"""

import json
import pathlib

import mpmath as mp

mp.mp.dps = 60

OUT = pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "oracle.json"


def M(a, c, x):
    return mp.hyp1f1(mp.mpf(a), mp.mpf(c), mp.mpf(x))


def log_m(a, c, x):
    return mp.log(M(a, c, x))


def g(a, c, x):
    a, c = mp.mpf(a), mp.mpf(c)
    return a / c * M(a + 1, c + 1, x) / M(a, c, x)


def one_minus_g(a, c, x):
    a, c = mp.mpf(a), mp.mpf(c)
    return 1 - g(a, c, x)


KUMMER_POINTS = [
    (0.5, 5.0, 10.0),
    (0.5, 5.0, -10.0),
    (0.5, 2.0, 5.0),
    (0.5, 1.5, 5.0),
    (0.5, 1.5, -5.0),
    (0.5, 15.0, 100.0),
    (0.5, 15.0, -50.0),
    (0.5, 5.0, 1e4),
    (0.5, 5.0, -1e4),
    (0.5, 5.0, 2e6),
    (0.5, 5.0, -2e6),
    (0.5, 50.0, 1e-3),
    (0.5, 50.0, -1e-3),
    (0.5, 500.0, 3e3),
    (0.5, 5000.0, 1e5),
    (0.5, 5000.0, -1e5),
    (0.5, 1e4, 2e6),
    (0.5, 1e4, -2e6),
    (1.3, 2.1, 0.7),
    (1.3, 2.1, -0.7),
    (2.5, 10.0, 40.0),
    (2.5, 10.0, -40.0),
    (7.0, 7.5, 300.0),
    (7.0, 7.5, -300.0),
    (0.1, 40.0, 800.0),
    (3.0, 1000.0, -5000.0),
    (9.0, 60.0, 1e3),
    # huge arguments: derivative and ratio far beyond the cancellation point
    (0.5, 15.0, 5e7),
    (0.5, 15.0, -5e7),
    (0.5, 5.0, 4.5e9),
    (0.5, 1.5, -1e9),
    (2.5, 10.0, -3e8),
    (0.5, 99.0, 1e8),
]


def kummer_table():
    rows = []
    for a, c, x in KUMMER_POINTS:
        rows.append({
            "a": a, "c": c, "x": x,
            "log_m": float(log_m(a, c, x)),
            "g": float(g(a, c, x)),
            "one_minus_g": float(one_minus_g(a, c, x)),
        })
    return rows


def root_table():
    """kappa with g(a, c; kappa) = r for r exactly representable in double."""
    cases = [(c, mult * c) for c in (1.5, 5.0, 15.0, 50.0, 500.0, 5000.0)
             for mult in (-100.0, -3.0, -0.05, 0.02, 1.0, 40.0, 150.0)]
    cases += [(5.0, 10.0), (5000.0, -1e5)]
    rows = []
    for c, k_star in cases:
        r = float(g(0.5, c, k_star))
        root = mp.findroot(lambda k: g(0.5, c, k) - mp.mpf(r), mp.mpf(k_star), tol=mp.mpf(10) ** -40)
        rows.append({"a": 0.5, "c": c, "kappa_star": k_star, "r": r, "kappa": float(root)})
    return rows


def derivative_table():
    rows = []
    for a, c, x in ((0.5, 5.0, 10.0), (0.5, 5.0, -10.0), (0.5, 15.0, 100.0), (2.5, 10.0, 1e-3), (0.5, 500.0, -0.2),
                    (0.5, 5.0, 4.5e9), (0.5, 15.0, -5e7)):
        d = mp.diff(lambda t: g(a, c, t), mp.mpf(x))
        rows.append({"a": a, "c": c, "x": x, "g": float(g(a, c, x)), "dg": float(d)})
    return rows


def main():
    doc = {
        "kummer": kummer_table(),
        "roots": root_table(),
        "derivative": derivative_table(),
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(doc, indent=1) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
