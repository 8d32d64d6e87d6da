"""Runs every grushin subcommand on small problems, validates the JSON
artifacts against the shipped schemas, checks CSV headers and verifies that a
rerun with the same manifest is byte-identical."""

import filecmp
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

BIN = pathlib.Path(sys.argv[1])
SCHEMAS = pathlib.Path(sys.argv[2])

RUNS = {
    "eigen": ["--gamma", "1", "--n", "64"],
    "scaling": ["--gamma", "2", "--n-max", "64"],
    "bounds": ["--gamma", "2", "--a", "0.9", "--b", "0.95", "--n-max", "64"],
    "observability": ["--gamma", "0.5", "--T", "0.3", "--nx", "61", "--nt", "60", "--n-max", "4"],
    "crossover": ["--gamma", "1", "--n-max", "96"],
    "control": ["--gamma", "0.5", "--T", "0.3", "--nx", "61", "--nt", "80", "--modes", "3", "--seed", "11"],
    "carleman": ["--gamma", "0.75", "--nx", "201", "--nt", "200", "--n", "8"],
    "trichotomy": ["--a", "0.6", "--b", "0.9", "--T", "0.3", "--n-max", "96"],
}


def run(cmd, args, out):
    return subprocess.run([str(BIN), cmd, "--output-dir", str(out), *args], capture_output=True, text=True)


def main():
    failures = []
    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        for cmd, args in RUNS.items():
            first, second = tmp / cmd / "first", tmp / cmd / "second"
            r1 = run(cmd, args, first)
            r2 = run(cmd, args, second)
            if r1.returncode != 0 or r2.returncode != 0:
                failures.append(f"{cmd}: exit {r1.returncode}/{r2.returncode}: {r1.stderr.strip()}")
                continue
            schema = json.loads((SCHEMAS / f"{cmd}.schema.json").read_text())
            doc = json.loads((first / f"{cmd}.json").read_text())
            try:
                jsonschema.validate(doc, schema)
            except jsonschema.ValidationError as e:
                failures.append(f"{cmd}: schema: {e.message}")
            for csv in first.glob("*.csv"):
                header = csv.read_text().splitlines()[0].split(",")
                if not all(h and not h[0].isdigit() and h[0] != "-" for h in header):
                    failures.append(f"{cmd}: {csv.name} lacks a header row")
            names = sorted(p.name for p in first.iterdir())
            if names != sorted(p.name for p in second.iterdir()):
                failures.append(f"{cmd}: rerun produced different files")
            _, mismatch, errors = filecmp.cmpfiles(first, second, names, shallow=False)
            if mismatch or errors:
                failures.append(f"{cmd}: rerun differs in {mismatch + errors}")
            print(f"{cmd}: ok ({', '.join(names)})")

        missing = subprocess.run([str(BIN), "eigen", "--config", str(tmp / "absent.cfg")], capture_output=True)
        if missing.returncode != 1:
            failures.append(f"missing config: exit {missing.returncode}, expected 1")
        bad = tmp / "bad.cfg"
        bad.write_text("a=0.8\nb=0.3\n")
        r = subprocess.run([str(BIN), "eigen", "--config", str(bad)], capture_output=True, text=True)
        if r.returncode != 1 or "require a < b" not in r.stderr:
            failures.append(f"a > b config: exit {r.returncode}, stderr {r.stderr.strip()!r}")

    for f in failures:
        print("FAIL", f)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
