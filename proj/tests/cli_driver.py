#!/usr/bin/env python3
"""End-to-end checks of the command-line tool against frozen values.

Usage: cli_driver.py <binary> <scenario-dir>
"""

import csv
import io
import json
import math
import os
import subprocess
import sys
import tempfile

FAILURES = []


def check(label, ok, detail=""):
    print("%s %s%s" % ("ok  " if ok else "FAIL", label, "  [%s]" % detail if detail else ""))
    if not ok:
        FAILURES.append(label)


def close(a, b, tol):
    return abs(a - b) <= tol


def rel_close(a, b, tol):
    return abs(a - b) <= tol * max(1e-300, abs(b))


class Cli:
    def __init__(self, binary, scenario_dir):
        self.binary = binary
        self.scenario_dir = scenario_dir

    def run(self, command, scenario, *extra):
        argv = [self.binary, command,
                "--scenario", os.path.join(self.scenario_dir, scenario)] + list(extra)
        return subprocess.run(argv, capture_output=True, text=True)

    def run_json(self, command, scenario, *extra):
        proc = self.run(command, scenario, *extra)
        if proc.returncode != 0:
            raise RuntimeError("exit %d: %s" % (proc.returncode, proc.stderr.strip()))
        return json.loads(proc.stdout)


def main():
    if len(sys.argv) != 3:
        print("usage: cli_driver.py <binary> <scenario-dir>", file=sys.stderr)
        return 2
    cli = Cli(sys.argv[1], sys.argv[2])
    kbt = 8.617333262e-5 * 300.0

    # ---- sr ----
    d = cli.run_json("sr", "pauli_xz.json")
    check("sr: pauli-xz robustness is 0.5", close(d["sr"], 0.5, 1e-5), "sr=%.9g" % d["sr"])
    check("sr: q_star is 2^-1/2", close(d["q_star"], 2.0 ** -0.5, 1e-5))
    check("sr: primal-dual gap certified", d["certified_gap"] <= 1e-6,
          "gap=%.3g" % d["certified_gap"])
    check("sr: witness operators present", len(d["witness"]["ys"]) == 4)

    d = cli.run_json("sr", "kraus_pauli.json")
    check("sr: kraus construction matches the preset", close(d["sr"], 0.5, 1e-5))

    d = cli.run_json("sr", "compatible.json")
    check("sr: compatible family is unsteerable", d["sr"] <= 1e-6, "sr=%.3g" % d["sr"])

    with tempfile.TemporaryDirectory() as tmp:
        broken = os.path.join(tmp, "broken.json")
        with open(broken, "w") as f:
            f.write('{"system": {')
        proc = subprocess.run([cli.binary, "sr", "--scenario", broken],
                              capture_output=True, text=True)
        check("sr: malformed scenario exits 3", proc.returncode == 3 and proc.stderr != "")
        proc = subprocess.run([cli.binary, "sr", "--scenario", os.path.join(tmp, "nope.json")],
                              capture_output=True, text=True)
        check("sr: missing scenario exits 3", proc.returncode == 3)

    # ---- tmin ----
    d = cli.run_json("tmin", "pauli_xz.json")
    check("tmin: partial schedule gives t0 ln2 / 2",
          close(d["t_min"], math.log(2.0) / 2.0, 1e-6), "t_min=%.9g" % d["t_min"])
    check("tmin: schedule block echoed", d["schedule"]["kind"] == "partial")

    d = cli.run_json("tmin", "pauli_rational_schedule.json")
    check("tmin: rational table gives sqrt2 - 1",
          close(d["t_min"], math.sqrt(2.0) - 1.0, 5e-5), "t_min=%.9g" % d["t_min"])

    d = cli.run_json("tmin", "compatible.json")
    check("tmin: compatible family survives zero time", d["t_min"] <= 1e-6)

    # ---- work ----
    d = cli.run_json("work", "pauli_xz.json", "--delta", "1.0")
    check("work: classical bound at delta=1",
          rel_close(d["classical_bound"], kbt * (math.sqrt(2.0) + 2.0 * math.log(math.cosh(1.0))),
                    1e-5))
    check("work: quantum value at delta=1",
          rel_close(d["quantum_value"], 2.0 * kbt * (1.0 + math.log(math.cosh(1.0))), 1e-9))
    check("work: ratio is sqrt2", close(d["ratio"], math.sqrt(2.0), 1e-4))
    check("work: report has four batches and clears the threshold",
          len(d["report"]["rows"]) == 4 and d["report"]["in_h_eta"])

    # NV center numbers; the last two printed references round the closed form
    # at the fourth digit, hence the wider 5e-4
    d = cli.run_json("work", "pauli_xz.json", "--delta", "1.59976e-7")
    check("work: NV delta_bar", rel_close(d["report"]["delta_bar"], 4.1357e-9, 1e-4))
    check("work: NV quantum value", rel_close(d["quantum_value"], 8.2714e-9, 1e-4))
    check("work: NV classical bound", rel_close(d["classical_bound"], 5.8479e-9, 5e-4))
    check("work: NV difference",
          rel_close(d["quantum_value"] - d["classical_bound"], 2.4235e-9, 5e-4))

    proc = cli.run("work", "pauli_xz.json", "--sweep", "0.01:2:50")
    check("work: sweep exits 0", proc.returncode == 0)
    rows = list(csv.DictReader(io.StringIO(proc.stdout)))
    check("work: sweep emits 50 rows", len(rows) == 50)
    check("work: sweep header columns",
          list(rows[0].keys()) ==
          ["delta", "classical_bound", "quantum_value", "ratio", "sr", "t_min_over_t0"])
    check("work: sweep ratio column constant sqrt2",
          all(close(float(r["ratio"]), math.sqrt(2.0), 1e-4) for r in rows))
    check("work: sweep endpoints resolve", float(rows[0]["delta"]) == 0.01
          and float(rows[-1]["delta"]) == 2.0)

    proc = cli.run("work", "compatible.json", "--delta", "1.0")
    check("work: unsteerable input exits 3", proc.returncode == 3)
    proc = cli.run("work", "pauli_xz.json", "--delta", "1.0", "--sweep", "0.1:1:5")
    check("work: --delta and --sweep exclude each other", proc.returncode == 3)

    # ---- audit ----
    d = cli.run_json("audit", "pauli_xz.json")
    check("audit: default 200+200 suite all-pass",
          d["all_pass"] and len(d["rows"]) == 400, "rows=%d" % len(d["rows"]))

    proc = cli.run("audit", "permissive_audit.json")
    check("audit: violating filter exits 3 when strict", proc.returncode == 3)
    d = cli.run_json("audit", "permissive_audit.json", "--permissive")
    flagged = [r["operation"] for r in d["rows"] if not r["certified"]]
    check("audit: permissive run flags the violating filter", flagged == ["lf1#4"],
          str(flagged))

    # ---- tstar ----
    d = cli.run_json("tstar", "oscillatory.json")
    check("tstar: oscillatory envelope loses steering at finite time",
          d["t_star"] is not None and 0.0 < d["t_star"] < 0.5,
          "t_star=%s" % d["t_star"])
    d = cli.run_json("tstar", "pauli_xz.json", "--t-max", "1")
    check("tstar: schedule evolution matches t_min",
          d["t_star"] is not None and close(d["t_star"], math.log(2.0) / 2.0, 1e-3))

    # ---- plumbing ----
    with tempfile.TemporaryDirectory() as tmp:
        a = os.path.join(tmp, "a.json")
        b = os.path.join(tmp, "b.json")
        for path in (a, b):
            proc = cli.run("audit", "pauli_xz.json", "--seed", "7", "--out", path)
            if proc.returncode != 0:
                raise RuntimeError(proc.stderr)
        check("plumbing: identical seed reproduces identical bytes",
              open(a, "rb").read() == open(b, "rb").read())
        proc = cli.run("sr", "pauli_xz.json", "--out", os.path.join(tmp, "no", "dir.json"))
        check("plumbing: unwritable output path exits 3", proc.returncode == 3)

    proc = cli.run("sr", "pauli_xz.json", "--tol-overrides", "bogus=1")
    check("plumbing: unknown tolerance key exits 3", proc.returncode == 3)
    proc = cli.run("sr", "pauli_xz.json", "--tol-overrides", "max_iters=2")
    check("plumbing: starved solver exits 2", proc.returncode == 2, proc.stderr.strip())
    proc = cli.run("sr", "pauli_xz.json", "--tol-overrides", "tol_gap=1e-9,max_iters=150")
    check("plumbing: multiple overrides accepted", proc.returncode == 0)

    print("failures: %d" % len(FAILURES))
    return 1 if FAILURES else 0


if __name__ == "__main__":
    sys.exit(main())
