"""Command line interface: config parsing, dispatch, record emission.

Configs are TOML: a structure block (variables, depth, weighted families),
named points, named covectors (coordinates in the osculating dual basis at a
point), operators with named weighted generators, numeric knobs, and an
optional scan block.  Output formats are table, jsonl (one object per line,
sorted keys, rationals as "p/q", floats rounded to 12 significant digits),
and csv.  Sampling is seeded, so identical config and seed give
byte-identical jsonl.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

try:
    import tomllib  # Python 3.11+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

import numpy as np

from . import spectra
from .grading import (build_graded_basis, check_hormander,
                      check_weak_commutativity, generate_filtration, wv_key)
from .hncone import (example_cone_catalog, hn_at_point, hn_directional,
                     is_worked_family, nonsingular_filter, sample_tangent_cones)
from .nilpotent import validate as validate_algebra
from .orbit import rep_of_covector
from .osculating import osculating_algebra
from .polyfield import parse_field
from .symbol import Generator, parse_operator, principal_symbol

__all__ = ["main", "RunConfig", "parse_config", "run", "emit_records",
           "ConfigError"]


class ConfigError(ValueError):
    pass


class RunConfig:
    def __init__(self, raw: dict, path: str = "<config>"):
        self.raw = raw
        self.path = path
        try:
            self._load()
        except KeyError as exc:
            raise ConfigError(f"{path}: missing config key {exc}") from exc

    def _load(self) -> None:
        raw = self.raw
        structure = raw.get("structure")
        if not structure:
            raise ConfigError(f"{self.path}: missing [structure] block")
        self.variables = list(structure["variables"])
        self.depth = tuple(int(d) for d in structure["depth"])
        nu = structure.get("nu")
        if nu is not None and int(nu) != len(self.depth):
            raise ConfigError(
                f"{self.path}: nu = {nu} disagrees with depth length {len(self.depth)}")
        self.nu = len(self.depth)
        fams = structure.get("family", [])
        if not fams:
            raise ConfigError(f"{self.path}: no [[structure.family]] blocks")
        self.families = []
        for i, fam in enumerate(fams):
            weight = tuple(int(w) for w in fam["weight"])
            if len(weight) != self.nu:
                raise ConfigError(
                    f"{self.path}: family #{i + 1} weight {weight} has length "
                    f"{len(weight)}, expected {self.nu}")
            fields = [parse_field(ex, self.variables) for ex in fam["fields"]]
            self.families.append((weight, fields))

        self.points = {}
        for label, coords in raw.get("points", {}).items():
            point = tuple(Fraction(str(c)) for c in coords)
            if len(point) != len(self.variables):
                raise ConfigError(
                    f"{self.path}: point {label!r} has {len(point)} coordinates, "
                    f"expected {len(self.variables)}")
            self.points[label] = point

        self.covectors = {}
        for label, spec in raw.get("covectors", {}).items():
            self.covectors[label] = {
                "point": spec["point"],
                "coords": [Fraction(str(c)) for c in spec["coords"]],
            }
            if spec["point"] not in self.points:
                raise ConfigError(
                    f"{self.path}: covector {label!r} references unknown point "
                    f"{spec['point']!r}")

        numeric = raw.get("numeric", {})
        self.jet_order = int(numeric.get("jet_order", sum(self.depth) + 2))
        self.hermite_m = int(numeric.get("hermite_m", 256))
        self.margin = float(numeric.get("margin", 1e-6))
        self.dedup_tol = float(numeric.get("dedup_tol", 1e-6))
        self.samples = int(numeric.get("samples", 6))
        self.count = int(numeric.get("count", 10))

        self.operators = {}
        for op in raw.get("operator", []):
            name = op["name"]
            order = tuple(int(k) for k in op["order"])
            if len(order) != self.nu:
                raise ConfigError(
                    f"{self.path}: operator {name!r} order has wrong length")
            gens = []
            for gname, spec in op.get("generators", {}).items():
                weight = tuple(int(w) for w in spec["weight"])
                if len(weight) != self.nu:
                    raise ConfigError(
                        f"{self.path}: generator {gname!r} of operator {name!r} "
                        f"has weight length {len(weight)}, expected {self.nu}")
                gens.append(Generator(gname, weight,
                                      parse_field(spec["field"], self.variables)))
            params = {k: Fraction(str(v))
                      for k, v in op.get("parameters", {}).items()}
            self.operators[name] = {
                "order": order, "generators": gens,
                "expression": op["expression"], "parameters": params,
            }

        self.scan = raw.get("scan")
        if self.scan:
            for key in ("operator", "parameter", "grid", "reps", "point"):
                if key not in self.scan:
                    raise ConfigError(f"{self.path}: [scan] missing {key!r}")
            if self.scan["operator"] not in self.operators:
                raise ConfigError(
                    f"{self.path}: [scan] references unknown operator "
                    f"{self.scan['operator']!r}")
            for rep in self.scan["reps"]:
                if rep not in self.covectors:
                    raise ConfigError(
                        f"{self.path}: [scan] references unknown covector {rep!r}")


def parse_config(path: str) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}")
    if not raw:
        raise ConfigError(f"{path}: empty config")
    return RunConfig(raw, path)


class Workspace:
    """Lazily built structure, bases, and per-point osculating algebras."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.structure = generate_filtration(config.families, config.depth,
                                             config.variables)
        self._basis = None
        self._osc = {}
        self._reps = {}

    @property
    def basis(self):
        if self._basis is None:
            self._basis = build_graded_basis(self.structure)
        return self._basis

    def point(self, label: str):
        if label in self.config.points:
            return self.config.points[label]
        try:
            return tuple(Fraction(c) for c in label.split(","))
        except ValueError:
            raise ConfigError(f"unknown point {label!r}")

    def osc(self, point, jet_order=None):
        key = (tuple(point), jet_order)
        if key not in self._osc:
            self._osc[key] = osculating_algebra(
                self.structure, self.basis, point,
                jet_order or self.config.jet_order)
        return self._osc[key]

    def representation(self, covector_label: str):
        if covector_label not in self._reps:
            spec = self.config.covectors.get(covector_label)
            if spec is None:
                raise ConfigError(f"unknown covector {covector_label!r}")
            point = self.config.points[spec["point"]]
            osc = self.osc(point)
            coords = spec["coords"]
            if len(coords) != osc.dim:
                raise ConfigError(
                    f"covector {covector_label!r} has {len(coords)} coordinates; "
                    f"the algebra at {spec['point']!r} has dimension {osc.dim}")
            rep = rep_of_covector(osc.algebra, osc.algebra.covector(coords))
            self._reps[covector_label] = (rep, osc)
        return self._reps[covector_label]

    def operator(self, name: str, overrides=None):
        spec = self.config.operators.get(name)
        if spec is None:
            raise ConfigError(f"unknown operator {name!r}")
        params = dict(spec["parameters"])
        if overrides:
            params.update(overrides)
        return parse_operator(spec["expression"], spec["generators"],
                              spec["order"], len(self.config.variables),
                              parameters=params, nu=self.config.nu)


# -- record emission -----------------------------------------------------------

def _clean(value):
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}" if value.denominator != 1 \
            else str(value.numerator)
    if isinstance(value, float):
        return float(f"{value:.12g}")
    if isinstance(value, complex):
        return {"re": float(f"{value.real:.12g}"), "im": float(f"{value.imag:.12g}")}
    if isinstance(value, np.ndarray):
        return [_clean(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (np.floating,)):
        return float(f"{float(value):.12g}")
    if isinstance(value, (np.integer,)):
        return int(value)
    return value


def emit_records(records, fmt: str = "table", stream=None) -> None:
    stream = stream or sys.stdout
    records = [_clean(r) for r in records]
    if fmt == "jsonl":
        for r in records:
            stream.write(json.dumps(r, sort_keys=True) + "\n")
    elif fmt == "csv":
        keys = sorted({k for r in records for k in r})
        if records:
            stream.write(",".join(keys) + "\n")
            for r in records:
                stream.write(",".join(_csv_cell(r.get(k)) for k in keys) + "\n")
    elif fmt == "table":
        if not records:
            stream.write("(no records)\n")
            return
        keys = sorted({k for r in records for k in r})
        widths = {k: max(len(k), *(len(_cell(r.get(k))) for r in records))
                  for k in keys}
        stream.write("  ".join(k.ljust(widths[k]) for k in keys) + "\n")
        for r in records:
            stream.write("  ".join(_cell(r.get(k)).ljust(widths[k])
                                   for k in keys) + "\n")
    else:
        raise ConfigError(f"unknown format {fmt!r}")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True)
    return str(v)


def _csv_cell(v) -> str:
    text = _cell(v)
    if "," in text or '"' in text:
        text = '"' + text.replace('"', '""') + '"'
    return text


# -- commands -------------------------------------------------------------------

def _cmd_validate(ws: Workspace, args) -> tuple[int, list[dict]]:
    records = []
    grid = list(ws.config.points.values()) or [
        tuple(Fraction(0) for _ in ws.config.variables)]
    for row in check_hormander(ws.basis, grid):
        records.append({"check": "hormander", **row})
    ok = all(r.get("full_rank", True) for r in records)
    for row in ws.structure.depth_report(grid):
        records.append({"check": "depth", **row})
        ok = ok and row["full"]
    for row in ws.structure.bracket_closure_report(grid):
        records.append({"check": "bracket_closure",
                        "weights": [list(w) for w in row["weights"]],
                        "target": list(row["target"]),
                        "point": [str(c) for c in row["point"]],
                        "ok": row["member"]})
        ok = ok and row["member"]
    wc = check_weak_commutativity(ws.structure)
    records.append({"check": "weak_commutativity", **{
        k: v for k, v in wc.items() if k != "witness"},
        "witness": None if wc["witness"] is None else {
            "weight": list(wc["witness"]["weight"]),
            "point": [str(c) for c in wc["witness"]["point"]]}})
    for label, point in ws.config.points.items():
        osc = ws.osc(point)
        report = validate_algebra(osc.algebra)
        records.append({"check": "osculating", "point": label,
                        "dim": osc.dim, "ok": report["ok"]})
        ok = ok and report["ok"]
    return (0 if ok else 1), records


def _cmd_filtration(ws: Workspace, args) -> tuple[int, list[dict]]:
    records = []
    for w in sorted(ws.structure.new_generators, key=wv_key):
        for f in ws.structure.new_generators[w]:
            records.append({"weight": list(w),
                            "field": f.format(ws.config.variables)})
    return 0, records


def _cmd_osculate(ws: Workspace, args) -> tuple[int, list[dict]]:
    point = ws.point(args.point)
    osc = ws.osc(point, args.jet_order)
    records = [{"kind": "grade", "weight": list(r["weight"]), "dim": r["dim"],
                "classes": r["classes"]} for r in osc.grade_table()]
    records.append({"kind": "algebra", "dim": osc.dim,
                    "dump": osc.algebra.dump()})
    return 0, records


def _cmd_cones(ws: Workspace, args) -> tuple[int, list[dict]]:
    point = ws.point(args.point)
    osc = ws.osc(point)
    report = sample_tangent_cones(
        ws.basis, osc, point, strategy=args.strategy,
        count=ws.config.samples, tol=ws.config.dedup_tol, seed=args.seed)
    catalog = (example_cone_catalog(osc)
               if is_worked_family(ws.structure) else [])
    records = []
    for cone in report.cones:
        row = {"point": [str(c) for c in point],
               "witness": cone.witness, "codim": cone.codim,
               "bracket_residual": cone.bracket_residual,
               "basis": [list(map(float, cone.subspace.to_float().ortho[:, i]))
                         for i in range(cone.subspace.dim)]}
        if catalog:
            from .grassmann import distance
            dists = [(distance(cone.subspace, c.subspace), c.witness)
                     for c in catalog if c.subspace.dim == cone.subspace.dim]
            if dists:
                best = min(dists, key=lambda z: z[0])
                row["catalog_match"] = {"distance": best[0], **best[1]}
        records.append(row)
    records.append({"point": [str(c) for c in point], "witness": "summary",
                    "diverged": report.diverged, "rejected": report.rejected,
                    "total_sequences": report.total_sequences})
    return 0, records


def _cmd_hn(ws: Workspace, args) -> tuple[int, list[dict]]:
    point = ws.point(args.point)
    osc = ws.osc(point)
    if args.xi:
        xi = [Fraction(c) for c in args.xi.split(",")]
        sample = hn_directional(ws.basis, osc, xi, count=ws.config.samples,
                                tol=ws.config.dedup_tol, seed=args.seed)
    else:
        report = sample_tangent_cones(
            ws.basis, osc, point, count=ws.config.samples,
            tol=ws.config.dedup_tol, seed=args.seed)
        sample = hn_at_point(report.cones)
    if args.nonsingular:
        sample = nonsingular_filter(sample, osc)
    records = []
    for entry in sample.covectors:
        records.append({"point": [str(c) for c in point],
                        "coords": [float(v) for v in entry["coords"]],
                        "source": entry["source"]})
    return 0, records


def _cmd_rep(ws: Workspace, args) -> tuple[int, list[dict]]:
    if args.xi in ws.config.covectors:
        rep, osc = ws.representation(args.xi)
    else:
        if not args.point:
            raise ConfigError("rep with raw covector coordinates needs --point")
        point = ws.point(args.point)
        osc = ws.osc(point)
        coords = [Fraction(c) for c in args.xi.split(",")]
        if len(coords) != osc.dim:
            raise ConfigError(
                f"covector has {len(coords)} coordinates, algebra has {osc.dim}")
        rep = rep_of_covector(osc.algebra, osc.algebra.covector(coords))
    records = [{"element": label, "weight": list(osc.algebra.weights[i]),
                "dpi": text}
               for i, (label, text) in enumerate(rep.table())]
    records.append({"element": "summary", "k": rep.k,
                    "polarization_dim": rep.polarization.dim})
    return 0, records


def _cmd_symbol(ws: Workspace, args) -> tuple[int, list[dict]]:
    rep, osc = ws.representation(args.xi)
    op = ws.operator(args.op)
    order = tuple(int(k) for k in args.order.split(",")) if args.order \
        else op.declared_order
    sym = principal_symbol(op, order, rep, osc)
    return 0, [{"operator": args.op, "order": list(order), "rep": args.xi,
                "symbol": sym.format(), "k": rep.k}]


def _cmd_spectrum(ws: Workspace, args) -> tuple[int, list[dict]]:
    rep, osc = ws.representation(args.xi)
    op = ws.operator(args.op)
    sym = principal_symbol(op, op.declared_order, rep, osc)
    if rep.k != 1:
        return 0, [{"operator": args.op, "rep": args.xi, "k": rep.k,
                    "verdict": spectra.UNSUPPORTED if rep.k > 1 else "SCALAR",
                    "value": None if rep.k > 1 else
                    [str(v) for v in sym.scalar_value()]}]
    hm = spectra.hermite_matrix(sym, ws.config.hermite_m)
    rows = spectra.eigenvalues(hm, ws.config.count)
    records = [{"operator": args.op, "rep": args.xi, "n": i,
                "M": ws.config.hermite_m,
                "value": row["value"], "stable": row["stable"]}
               for i, row in enumerate(rows)]
    unstable = any(not row["stable"] for row in rows)
    return (1 if (args.strict and unstable) else 0), records


def _cmd_verdict(ws: Workspace, args) -> tuple[int, list[dict]]:
    scan = ws.config.scan
    if not scan:
        raise ConfigError("config has no [scan] block")
    grid = [Fraction(str(c)) for c in scan["grid"]]
    reps = [(label, *ws.representation(label)) for label in scan["reps"]]
    op_name, param = scan["operator"], scan["parameter"]

    def family(c):
        out = []
        op = ws.operator(op_name, overrides={param: c})
        for label, rep, osc in reps:
            out.append((label, principal_symbol(op, op.declared_order, rep, osc)))
        return out

    result = spectra.rockland_scan(family, grid, M=ws.config.hermite_m,
                                   margin=ws.config.margin)
    records = [{**row, "c": row["c"]} for row in result["rows"]]
    records.append({"rep": "scan", "c": None, "k": None,
                    "verdict": "MAXIMALLY_HYPOELLIPTIC_ON_GRID"
                    if result["maximally_hypoelliptic_on_grid"] else "OBSTRUCTED",
                    "obstructions": [str(c) for c in result["obstructions"]],
                    "inconclusive": [str(c) for c in result["inconclusive"]]})
    status = 1 if (args.strict and result["inconclusive"]) else 0
    return status, records


_COMMANDS = {
    "validate": _cmd_validate,
    "filtration": _cmd_filtration,
    "osculate": _cmd_osculate,
    "cones": _cmd_cones,
    "hn": _cmd_hn,
    "rep": _cmd_rep,
    "symbol": _cmd_symbol,
    "spectrum": _cmd_spectrum,
    "verdict": _cmd_verdict,
}


def run(command: str, config: RunConfig, args) -> tuple[int, list[dict]]:
    if command not in _COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    ws = Workspace(config)
    return _COMMANDS[command](ws, args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nilgeom",
        description="graded filtrations, osculating algebras, cones, "
                    "representations, symbols, spectra")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True)
    parser.add_argument("--format", default="table",
                        choices=["table", "jsonl", "csv"])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--strict", action="store_true",
                        help="nonzero exit on UNSTABLE/INCONCLUSIVE aggregates")
    parser.add_argument("--point", default=None)
    parser.add_argument("--jet-order", type=int, default=None)
    parser.add_argument("--strategy", default="auto")
    parser.add_argument("--xi", default=None)
    parser.add_argument("--op", default=None)
    parser.add_argument("--order", default=None)
    parser.add_argument("--nonsingular", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    threads = os.environ.get("NILGEOM_THREADS")
    if threads:
        os.environ.setdefault("OMP_NUM_THREADS", threads)
    try:
        config = parse_config(args.config)
        needs_point = args.command in ("osculate", "cones", "hn")
        if needs_point and not args.point:
            raise ConfigError(f"{args.command} needs --point")
        if args.command in ("rep", "symbol", "spectrum") and not args.xi:
            raise ConfigError(f"{args.command} needs --xi")
        if args.command in ("symbol", "spectrum") and not args.op:
            raise ConfigError(f"{args.command} needs --op")
        status, records = run(args.command, config, args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    emit_records(records, args.format)
    return status


if __name__ == "__main__":
    sys.exit(main())
