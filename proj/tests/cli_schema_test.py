#!/usr/bin/env python3
"""Runs the CLI on sample inputs, validates JSON output against schemas/, and checks byte-identical reruns."""
import json
import pathlib
import subprocess
import sys

import jsonschema
from referencing import Registry, Resource

cli, root = sys.argv[1], pathlib.Path(sys.argv[2])
data = root / "data"

registry = Registry()
schemas = {}
for path in sorted((root / "schemas").glob("*.schema.json")):
    doc = json.loads(path.read_text())
    jsonschema.Draft202012Validator.check_schema(doc)
    registry = registry.with_resource(doc["$id"], Resource.from_contents(doc))
    schemas[path.name.removesuffix(".schema.json")] = doc


def validate(obj, name):
    jsonschema.Draft202012Validator(schemas[name], registry=registry).validate(obj)


def run(args, expect_exit):
    out = []
    for _ in range(2):
        p = subprocess.run([cli, *args], capture_output=True, env={"PATH": "/usr/bin:/bin"})
        if p.returncode != expect_exit:
            sys.exit(f"{args}: exit {p.returncode}, expected {expect_exit}\n{p.stderr.decode()}")
        out.append(p.stdout)
    if out[0] != out[1]:
        sys.exit(f"{args}: output differs between runs")
    return json.loads(out[0])


failures = 0


def check(name, args, expect_exit, schema, extra=None):
    global failures
    try:
        doc = run(args, expect_exit)
        validate(doc, schema)
        if extra:
            extra(doc)
        print(f"ok   {name}")
    except (jsonschema.ValidationError, AssertionError, SystemExit) as e:
        failures += 1
        print(f"FAIL {name}: {e}")


def has_log(doc):
    assert doc["sdp_log"], "empty sdp_log"


def convex_size(n):
    def f(doc):
        assert doc["verdict"] == "convex", doc["verdict"]
        assert doc["minimal_pencil"]["rows"] == n, doc["minimal_pencil"]["rows"]
    return f


def hermitian(doc):
    assert doc["hermitian"], "pencil is not hermitian"


for f in ["ball_pencil", "singular_pencil"]:
    validate(json.loads((data / f"{f}.json").read_text()), "pencil")
validate(json.loads((data / "point_2x2.json").read_text()), "point")
validate(json.loads((data / "genflip_real.json").read_text()), "genflip_input")

deg4 = str(data / "degree4_product.txt")
check("analyze convex", ["analyze", deg4], 0, "convexity_report", convex_size(3))
check("analyze nonconvex", ["analyze", "1 - x1 - x1' - x1'*x1 - x1*x1 - x1'*x1'"], 3, "convexity_report")
check("analyze constant", ["analyze", "1"], 0, "convexity_report")
check("analyze rational", ["analyze", "inv(1 - x1'*x1)"], 0, "convexity_report")
check("analyze dump-sdp", ["analyze", deg4, "--dump-sdp"], 0, "convexity_report", has_log)
check("lmi", ["lmi", "1 - x1'*x1"], 0, "pencil")
check("lmi dump-sdp", ["lmi", deg4, "--dump-sdp"], 0, "pencil", has_log)
check("rankcheck full", ["rankcheck", "--pencil", str(data / "ball_pencil.json"),
                         "--domain", str(data / "ball_pencil.json")], 0, "rank_check")
check("rankcheck deficient", ["rankcheck", "--pencil", str(data / "singular_pencil.json"),
                              "--domain", str(data / "ball_pencil.json"), "--dump-sdp"], 3, "rank_check", has_log)
check("rankcheck scan", ["rankcheck", "--pencil", str(data / "singular_pencil.json"),
                         "--domain", str(data / "ball_pencil.json"), "--no-gns", "--seed", "7"], 3, "rank_check")
check("realize", ["realize", "inv(1 - x1*x2)"], 0, "realization")
check("realize poly", ["realize", deg4], 0, "realization")
check("genflip", ["genflip", str(data / "genflip_real.json")], 0, "pencil", hermitian)
check("eval", ["eval", deg4, "--point", str(data / "point_2x2.json")], 0, "eval_output")

for args, code in [(["analyze", "1 - (x1"], 1), (["analyze", "x1"], 1), (["analyze", "1", "--tol", "0.5"], 1),
                   (["rankcheck", "--pencil", str(data / "point_2x2.json"), "--domain", str(data / "ball_pencil.json")], 1)]:
    p = subprocess.run([cli, *args], capture_output=True)
    if p.returncode != code:
        failures += 1
        print(f"FAIL exit code {args}: {p.returncode} != {code}")
    else:
        print(f"ok   exit {code} for {args[:2]}")

sys.exit(1 if failures else 0)
