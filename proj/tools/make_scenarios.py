#!/usr/bin/env python3
"""Regenerate the example scenario files under scenarios/.

The files are committed; this script only exists so they can be rebuilt or
extended without hand-editing matrix entries.
"""

import json
import math
import os

OUT_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                       "scenarios")


def cpair(z):
    return [float(z.real), float(z.imag)]


def matrix(entries_2d):
    dim = len(entries_2d)
    flat = [cpair(complex(v)) for row in entries_2d for v in row]
    return {"dim": dim, "entries": flat}


def complex_matrix(entries_2d):
    rows = len(entries_2d)
    cols = len(entries_2d[0])
    flat = [cpair(complex(v)) for row in entries_2d for v in row]
    return {"rows": rows, "cols": cols, "entries": flat}


def system_qubit(temperature=300.0):
    return {"dim": 2, "temperature": temperature}


def pauli_xz_scenario():
    return {
        "system": system_qubit(),
        "instruments": {"kind": "projective-pauli"},
        "schedule": {"kind": "partial", "t0": 1.0},
    }


def kraus_pauli_scenario():
    """The same preparation family spelled out as explicit Kraus operators."""
    s = 1.0 / math.sqrt(2.0)
    targets = {
        (0, 0): [s, s],
        (1, 0): [s, -s],
        (0, 1): [1.0, 0.0],
        (1, 1): [0.0, 1.0],
    }
    operators = {}
    for (a, x), t in targets.items():
        ops = []
        for k in range(2):
            bra = [0.0, 0.0]
            bra[k] = 1.0 / math.sqrt(2.0)
            ops.append(complex_matrix([[t[0] * bra[0], t[0] * bra[1]],
                                       [t[1] * bra[0], t[1] * bra[1]]]))
        operators["%d|%d" % (a, x)] = ops
    return {
        "system": system_qubit(),
        "instruments": {
            "kind": "kraus",
            "n_outcomes": 2,
            "n_settings": 2,
            "operators": operators,
        },
        "schedule": {"kind": "partial", "t0": 1.0},
    }


def compatible_scenario():
    """One Lueders Z device with setting-dependent relabeling noise, written as
    Choi blocks. Compatible by construction, so sr = 0 on any thermal state."""
    j0 = [[0.0] * 4 for _ in range(4)]
    j0[0][0] = 0.5  # rho -> |0><0| rho |0><0|, Choi on out (x) in
    j1 = [[0.0] * 4 for _ in range(4)]
    j1[3][3] = 0.5

    def mix(p0, p1):
        return matrix([[p0 * j0[r][c] + p1 * j1[r][c] for c in range(4)] for r in range(4)])

    return {
        "system": system_qubit(),
        "instruments": {
            "kind": "choi",
            "n_outcomes": 2,
            "n_settings": 2,
            "filters": {
                "0|0": mix(1.0, 0.0),
                "1|0": mix(0.0, 1.0),
                "0|1": mix(0.7, 0.3),
                "1|1": mix(0.3, 0.7),
            },
        },
        "schedule": {"kind": "partial", "t0": 1.0},
    }


def rational_schedule_scenario():
    """h(t) = 1/(1+t), tabulated densely enough that log-linear interpolation
    keeps h_inv accurate to about 1e-5 in the unit-time region."""
    samples = []
    t = 0.0
    while t <= 10.0 + 1e-9:
        samples.append([round(t, 10), 1.0 / (1.0 + t)])
        t += 0.01
    # log-spaced tail out to h < 1e-6
    n_tail = 256
    for i in range(1, n_tail + 1):
        tt = 10.0 * (2.0e5 ** (i / n_tail))
        samples.append([tt, 1.0 / (1.0 + tt)])
    return {
        "system": system_qubit(),
        "instruments": {"kind": "projective-pauli"},
        "schedule": {"kind": "custom-table", "samples": samples},
    }


def oscillatory_scenario():
    """Non-Markovian envelope c(t) = e^{-t} (1 + cos 10t) / 2 on [0, 6]."""
    samples = []
    n = 3000
    for i in range(n + 1):
        t = 6.0 * i / n
        samples.append([t, math.exp(-t) * (1.0 + math.cos(10.0 * t)) / 2.0])
    return {
        "system": system_qubit(),
        "instruments": {"kind": "projective-pauli"},
        "evolution": {"kind": "envelope-table", "samples": samples},
    }


def permissive_audit_scenario():
    """Includes one explicit filter that rescales the thermal populations, so it
    violates condition (ii) and only runs under --permissive."""
    sc = pauli_xz_scenario()
    sc["operations"] = {
        "audit": {
            "n": 4,
            "seed": 7,
            "filters": [complex_matrix([[1.0, 0.0], [0.0, 0.5]])],
        }
    }
    return sc


def main():
    os.makedirs(OUT_DIR, exist_ok=True)
    files = {
        "pauli_xz.json": pauli_xz_scenario(),
        "kraus_pauli.json": kraus_pauli_scenario(),
        "compatible.json": compatible_scenario(),
        "pauli_rational_schedule.json": rational_schedule_scenario(),
        "oscillatory.json": oscillatory_scenario(),
        "permissive_audit.json": permissive_audit_scenario(),
    }
    for name, doc in files.items():
        path = os.path.join(OUT_DIR, name)
        with open(path, "w") as f:
            json.dump(doc, f, indent=None, separators=(",", ":"), sort_keys=True)
            f.write("\n")
        print("wrote", path)


if __name__ == "__main__":
    main()
