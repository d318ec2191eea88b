"""Command-line front end.

    mellin-lab weights --problem op.json --out reports/
    mellin-lab index   --problem idx.json --out reports/
    mellin-lab verify  --suite all --seed 0

Exit codes: 0 pass, 1 check failure, 2 input error, 3 inconclusive numerics.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import conormal, merosym, scales
from .mellin import line_offset
from .report import InconclusiveNumerics, _plain
from .suites import SUITES, SuiteConfig, run_suite

EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_INCONCLUSIVE = 0, 1, 2, 3

_number = {"type": "number"}
_complex = {"oneOf": [_number, {"type": "array", "items": _number, "minItems": 2, "maxItems": 2}]}
_coefficient = {
    "oneOf": [
        _complex,
        {"type": "object", "additionalProperties": False, "required": ["diag"],
         "properties": {"diag": {"type": "array", "items": _complex, "minItems": 1}}},
        {"type": "object", "additionalProperties": False, "required": ["matrix"],
         "properties": {"matrix": {"type": "array", "minItems": 1,
                                   "items": {"type": "array", "items": _complex, "minItems": 1}}}},
    ]
}

WEIGHTS_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["operation", "operator", "gamma_range"],
    "properties": {
        "operation": {"const": "weights"},
        "operator": {
            "type": "object",
            "additionalProperties": False,
            "required": ["mu", "coefficients"],
            "properties": {
                "mu": {"type": "integer", "minimum": 0},
                "mode_cutoff": {"type": "integer", "minimum": 0},
                "base_dim": {"type": "integer", "minimum": 0},
                "coefficients": {"type": "array", "items": _coefficient, "minItems": 1},
            },
        },
        "gamma_range": {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
        "margin": {"type": "number", "exclusiveMinimum": 0},
    },
}

INDEX_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["operation", "k"],
    "properties": {
        "operation": {"const": "index"},
        "k": {"type": "integer", "minimum": -6, "maximum": 6},
        "gamma": _number,
        "sizes": {"type": "array", "items": {"type": "integer", "minimum": 16}, "minItems": 1},
    },
}


class InputError(ValueError):
    pass


def _load_problem(path: str, schema: dict) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read problem file: {exc}") from exc
    try:
        jsonschema.validate(data, schema)
    except jsonschema.ValidationError as exc:
        raise InputError(f"schema violation: {exc.message}") from exc
    return data


def _as_complex(x) -> complex:
    return complex(x[0], x[1]) if isinstance(x, list) else complex(x)


def _coefficient_matrix(c, dim: int) -> np.ndarray:
    if isinstance(c, dict) and "diag" in c:
        d = [_as_complex(x) for x in c["diag"]]
        if len(d) != dim:
            raise InputError(f"diag coefficient has {len(d)} entries, scale has {dim}")
        return np.diag(d)
    if isinstance(c, dict):
        m = np.array([[_as_complex(x) for x in row] for row in c["matrix"]])
        if m.shape != (dim, dim):
            raise InputError(f"matrix coefficient has shape {m.shape}, scale has {(dim, dim)}")
        return m
    return _as_complex(c) * np.eye(dim)


def build_operator(spec: dict) -> conormal.FuchsOperator:
    S = scales.make_fourier_scale(spec.get("mode_cutoff", 0), spec.get("base_dim", 0))
    mats = [_coefficient_matrix(c, S.dim) for c in spec["coefficients"]]
    if len(mats) != spec["mu"] + 1:
        raise InputError(f"order {spec['mu']} needs {spec['mu'] + 1} coefficients, got {len(mats)}")
    if all(np.all(m == 0) for m in mats):
        raise InputError("schema violation: zero operator")
    return conormal.FuchsOperator(int(spec["mu"]), tuple(mats), S)


def _write_json(out: Path | None, name: str, payload: dict):
    if out is None:
        return
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(json.dumps(_plain(payload), indent=2, sort_keys=True))


def _write_csv(out: Path | None, name: str, header, rows):
    if out is None:
        return
    out.mkdir(parents=True, exist_ok=True)
    with open(out / name, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def cmd_weights(args) -> int:
    prob = _load_problem(args.problem, WEIGHTS_SCHEMA)
    A = build_operator(prob["operator"])
    g0, g1 = prob["gamma_range"]
    try:
        rep = conormal.admissible_weights(A, (g0, g1), A.scale.base_dim, margin=prob.get("margin", 1e-6))
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    payload = rep.to_dict()
    payload["seed"] = args.seed
    print(json.dumps(_plain({"check": "weights", "passed": rep.passed, "forbidden_gamma": rep.forbidden})))
    print(rep.table())
    out = Path(args.out) if args.out else None
    _write_json(out, "weights.json", payload)
    if out is not None:
        (out / "weights.txt").write_text(rep.table() + "\n")
    P = conormal.conormal_symbol(A)
    off = (A.scale.base_dim + 1) / 2
    rho = np.linspace(-50, 50, 1001)
    rows = []
    for g in np.linspace(g0, g1, int(max(2, 200 * args.grid_scale))):
        sig = np.linalg.svd(P((off - g) + 1j * rho), compute_uv=False).min()
        rows.append((f"{g:.10g}", f"{sig:.6e}"))
    _write_csv(out, "weights_lines.csv", ["gamma", "min_sigma_on_line"], rows)
    return EXIT_PASS if rep.passed else EXIT_FAIL


def cmd_index(args) -> int:
    prob = _load_problem(args.problem, INDEX_SCHEMA)
    k, gamma = int(prob["k"]), float(prob.get("gamma", 0.0))
    sizes = tuple(prob.get("sizes", (128, 256, 512)))
    beta = line_offset(gamma)
    f = merosym.make_index_symbol(k, gamma)
    w, res = merosym.winding_number(f, beta)
    t = merosym.toeplitz_index_oracle(f, gamma, sizes)
    payload = {"winding": w, "residue": res, "toeplitz": t.per_size, "agree": w == t.index,
               "k": k, "gamma": gamma, "seed": args.seed}
    print(json.dumps(_plain(payload), sort_keys=True))
    out = Path(args.out) if args.out else None
    _write_json(out, "index.json", payload)
    tau = np.linspace(-10, 10, int(max(2, 401 * args.grid_scale)))
    vals = 1 + f.on_line(beta, tau)[:, 0, 0]
    _write_csv(out, "index_line.csv", ["tau", "re", "im"],
               [(f"{a:.6g}", f"{v.real:.10g}", f"{v.imag:.10g}") for a, v in zip(tau, vals)])
    return EXIT_PASS if payload["agree"] and w == k else EXIT_FAIL


def _decay_rows(rep):
    m = rep.measured
    if "omegas" in m and "discrepancy" in m:
        return [(f"{a:.6g}", f"{b:.6e}") for a, b in zip(m["omegas"], m["discrepancy"])]
    return None


def cmd_verify(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    for n in names:
        if n not in SUITES:
            raise InputError(f"unknown suite {n!r}; choose from all, {', '.join(SUITES)}")
    cfg = SuiteConfig(seed=args.seed, grid_scale=args.grid_scale)
    out = Path(args.out) if args.out else None
    ok = True
    for n in names:
        res = run_suite(n, cfg)
        lines = []
        for rep in res.reports:
            rec = {"suite": n, "check": rep.name, "passed": bool(rep.passed), "seed": cfg.seed,
                   "measured": rep.to_dict()["measured"]}
            lines.append(json.dumps(rec, sort_keys=True))
            print(lines[-1])
            rows = _decay_rows(rep)
            if rows:
                safe = "".join(ch if ch.isalnum() else "_" for ch in rep.name)
                _write_csv(out, f"decay_{safe}.csv", ["omega", "discrepancy"], rows)
        print(json.dumps({"suite": n, "passed": res.passed, "elapsed": round(res.elapsed, 3),
                          "limit": res.limit}))
        if out is not None:
            out.mkdir(parents=True, exist_ok=True)
            (out / f"verify_{n}.jsonl").write_text("\n".join(lines) + "\n")
        ok &= res.passed
    return EXIT_PASS if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="directory for JSON reports and CSV data")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized test functions")
    common.add_argument("--grid-scale", type=float, default=1.0, help="multiplier for grid sizes")
    p = argparse.ArgumentParser(prog="mellin-lab", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    w = sub.add_parser("weights", parents=[common], help="admissible weights of a Fuchs-type operator")
    w.add_argument("--problem", required=True)
    w.set_defaults(func=cmd_weights)
    i = sub.add_parser("index", parents=[common], help="winding number vs truncation index")
    i.add_argument("--problem", required=True)
    i.set_defaults(func=cmd_index)
    v = sub.add_parser("verify", parents=[common], help="run an acceptance suite")
    v.add_argument("--suite", default="all", help=f"all or one of: {', '.join(SUITES)}")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_PASS
    if args.grid_scale <= 0:
        print("error: --grid-scale must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InconclusiveNumerics as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE


if __name__ == "__main__":
    sys.exit(main())
