"""Command-line front end.

    susy-spectra moments --nmax 10 --digits 40
    susy-spectra variational --potential susy-minus --nmax 7 --format md
    susy-spectra rpm --potential quartic --s 0 --dmax 30
    susy-spectra susy-check --dmax 30 --digits 80
    susy-spectra reproduce 3

Every flag may also come from a JSON file given with --config, whose keys are
the flag names without dashes (``{"dmax": 20, "print-digits": 12}``). Flags
on the command line win over the file, the file over the defaults.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass
from fractions import Fraction

from .core import PolynomialPotential, PrecisionContext
from .errors import InvalidConfig, SpectraError
from .moments import moment_table
from .rayleigh_ritz import MAX_BASIS_SIZE, variational_table
from .report import GOLDEN, RPM_DMAX, reproduce_table, sector_spectrum, significant
from .rpm import track_sequences
from .series import series_coefficients
from .susy import classify_roots, degeneracy_report, interleaving_check

EXIT_OK, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2
FORMATS = ("csv", "json", "md")
EXPANSIONS = ("auto", "half-line", "x2")
POTENTIALS = {"susy-minus": "susy_minus", "susy-plus": "susy_plus", "susy": "susy_minus", "quartic": "quartic"}

# per subcommand: flag -> default
DEFAULTS = {
    "moments": {"nmax": 10, "digits": 50, "print-digits": 30, "format": "csv"},
    "variational": {"potential": "susy-minus", "nmin": 2, "nmax": 7, "digits": 50, "print-digits": 10, "format": "md"},
    "rpm": {
        "potential": "susy",
        "s": 0,
        "dmax": RPM_DMAX,
        "d": 0,
        "digits": 80,
        "tolerance": "1e-25",
        "emin": "-1",
        "emax": "40",
        "grid-step": "0.05",
        "print-digits": 25,
        "format": "csv",
        "dump-series": None,
        "expansion": "auto",
    },
    "susy-check": {"dmax": RPM_DMAX, "digits": 80, "tolerance": "1e-25", "emin": "-1", "emax": "40", "nmax": 7,
                   "format": "json"},
    "reproduce": {"dmax": RPM_DMAX, "digits": 80, "tolerance": "1e-25", "format": "md"},
}
COMMON = {"output": None, "config": None, "verbose": False}


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    potential: str | None = None
    s: int | None = None
    n_range: tuple | None = None
    D_max: int | None = None
    d: int | None = None
    window: tuple | None = None
    grid_step: Fraction | None = None
    decimal_digits: int = 50
    root_tolerance: Fraction | None = None
    print_digits: int | None = None
    output_format: str = "csv"
    output_path: str | None = None
    table_id: int | None = None
    dump_series: Fraction | None = None
    reduced: bool = False
    verbose: bool = False

    def context(self) -> PrecisionContext:
        try:
            return PrecisionContext(self.decimal_digits, self.root_tolerance)
        except ValueError as exc:
            field = "tolerance" if "root_tolerance" in str(exc) else "digits"
            raise InvalidConfig(field, str(exc)) from None


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="susy-spectra", description="Variational and Riccati-Pade eigenvalues.")
    sub = p.add_subparsers(dest="subcommand", required=True)
    S = argparse.SUPPRESS

    def common(sp):
        sp.add_argument("--config", default=S, help="JSON file with flag values")
        sp.add_argument("--output", "-o", default=S, help="write here instead of stdout")
        sp.add_argument("--format", choices=FORMATS, default=S)
        sp.add_argument("--digits", type=int, default=S, help="working precision in decimal digits")
        sp.add_argument("--verbose", "-v", action="store_true", default=S)

    sp = sub.add_parser("moments", help="moments M(n) of exp(-2x^3/3)")
    common(sp)
    sp.add_argument("--nmax", type=int, default=S)
    sp.add_argument("--print-digits", type=int, default=S)

    sp = sub.add_parser("variational", help="Rayleigh-Ritz upper bounds")
    common(sp)
    sp.add_argument("--potential", choices=["susy-minus", "susy-plus", "quartic"], default=S)
    sp.add_argument("--nmin", type=int, default=S)
    sp.add_argument("--nmax", type=int, default=S)
    sp.add_argument("--print-digits", type=int, default=S)

    sp = sub.add_parser("rpm", help="Riccati-Pade root sequences")
    common(sp)
    sp.add_argument("--potential", choices=["susy", "susy-minus", "susy-plus", "quartic"], default=S)
    sp.add_argument("--s", type=int, choices=[0, 1], default=S)
    sp.add_argument("--dmax", type=int, default=S)
    sp.add_argument("--d", type=int, choices=[0, 1], default=S)
    sp.add_argument("--tolerance", default=S, help="root tolerance, e.g. 1e-25")
    sp.add_argument("--emin", default=S)
    sp.add_argument("--emax", default=S)
    sp.add_argument("--grid-step", default=S)
    sp.add_argument("--print-digits", type=int, default=S)
    sp.add_argument("--dump-series", default=S, metavar="E", help="print the series coefficients at E and stop")
    sp.add_argument(
        "--expansion",
        choices=EXPANSIONS,
        default=S,
        help="series variable: x on the half line, or x**2 for even potentials (auto picks x**2 when possible)",
    )

    sp = sub.add_parser("susy-check", help="partner degeneracy from both parity sectors")
    common(sp)
    sp.add_argument("--dmax", type=int, default=S)
    sp.add_argument("--tolerance", default=S)
    sp.add_argument("--emin", default=S)
    sp.add_argument("--emax", default=S)
    sp.add_argument("--nmax", type=int, default=S, help="variational basis size used for labelling")

    sp = sub.add_parser("reproduce", help="recompute one reference table and compare")
    common(sp)
    sp.add_argument("table", type=int, choices=sorted(GOLDEN))
    sp.add_argument("--dmax", type=int, default=S)
    sp.add_argument("--tolerance", default=S)
    return p


def _load_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InvalidConfig("config", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InvalidConfig("config", f"{path} is not valid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise InvalidConfig("config", "top level must be a JSON object")
    return data


def _rational(name: str, value) -> Fraction:
    try:
        return Fraction(str(value))
    except (ValueError, ZeroDivisionError):
        raise InvalidConfig(name, f"not a number: {value!r}") from None


def _integer(name: str, value, low: int, high: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidConfig(name, f"expected an integer, got {value!r}")
    if value < low or (high is not None and value > high):
        bounds = f">= {low}" if high is None else f"in [{low}, {high}]"
        raise InvalidConfig(name, f"must be {bounds}, got {value}")
    return value


def merge_settings(subcommand: str, flags: dict, file_values: dict) -> dict:
    """flag > file > default; unknown file keys are an error."""
    allowed = dict(DEFAULTS[subcommand], **COMMON)
    settings = dict(allowed)
    for key, value in file_values.items():
        if key not in allowed or key == "config":
            raise InvalidConfig(key, f"unknown setting for {subcommand}")
        settings[key] = value
    for key, value in flags.items():
        settings[key.replace("_", "-")] = value
    return settings


def build_config(argv=None) -> RunConfig:
    ns = vars(_parser().parse_args(argv))
    subcommand = ns.pop("subcommand")
    table = ns.pop("table", None)
    file_values = _load_file(ns["config"]) if "config" in ns else {}
    v = merge_settings(subcommand, ns, file_values)

    fmt = v["format"]
    if fmt not in FORMATS:
        raise InvalidConfig("format", f"expected one of {', '.join(FORMATS)}, got {fmt!r}")
    digits = _integer("digits", v["digits"], 30, 2000)
    cfg = dict(
        subcommand=subcommand,
        decimal_digits=digits,
        output_format=fmt,
        output_path=v["output"],
        verbose=bool(v["verbose"]),
        table_id=table,
    )
    if "print-digits" in v:
        cfg["print_digits"] = _integer("print-digits", v["print-digits"], 1, digits)
    if "tolerance" in v:
        cfg["root_tolerance"] = _rational("tolerance", v["tolerance"])
    if "potential" in v:
        if v["potential"] not in POTENTIALS:
            raise InvalidConfig("potential", f"unknown potential {v['potential']!r}")
        cfg["potential"] = POTENTIALS[v["potential"]]
    if "s" in v:
        if v["s"] not in (0, 1):
            raise InvalidConfig("s", f"must be 0 or 1, got {v['s']!r}")
        cfg["s"] = v["s"]
    if "d" in v:
        if v["d"] not in (0, 1):
            raise InvalidConfig("d", f"must be 0 or 1, got {v['d']!r}")
        cfg["d"] = v["d"]
    if "dmax" in v:
        cfg["D_max"] = _integer("dmax", v["dmax"], 3, 200)
    if subcommand == "moments":
        cfg["n_range"] = (0, _integer("nmax", v["nmax"], 0, 10000))
    elif subcommand == "variational":
        lo = _integer("nmin", v["nmin"], 1, MAX_BASIS_SIZE)
        cfg["n_range"] = (lo, _integer("nmax", v["nmax"], lo, MAX_BASIS_SIZE))
    elif subcommand == "susy-check":
        cfg["n_range"] = (_integer("nmax", v["nmax"], 2, MAX_BASIS_SIZE),) * 2
    if "emin" in v:
        lo, hi = _rational("emin", v["emin"]), _rational("emax", v["emax"])
        if lo >= hi:
            raise InvalidConfig("emin", f"must be below emax ({float(lo)} >= {float(hi)})")
        cfg["window"] = (lo, hi)
    if "grid-step" in v:
        step = _rational("grid-step", v["grid-step"])
        if step <= 0:
            raise InvalidConfig("grid-step", "must be positive")
        cfg["grid_step"] = step
    if "expansion" in v:
        if v["expansion"] not in EXPANSIONS:
            raise InvalidConfig("expansion", f"expected one of {', '.join(EXPANSIONS)}, got {v['expansion']!r}")
        even = PolynomialPotential.named(cfg["potential"]).is_even
        if v["expansion"] == "x2" and not even:
            raise InvalidConfig("expansion", f"{v['potential']} has odd powers and no x**2 series")
        cfg["reduced"] = v["expansion"] == "x2" or (v["expansion"] == "auto" and even)
    if v.get("dump-series") is not None:
        cfg["dump_series"] = _rational("dump-series", v["dump-series"])
    config = RunConfig(**cfg)
    config.context()
    return config


# ---- rendering ------------------------------------------------------------


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _md(header, rows) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
    return "\n".join(lines) + "\n"


def _json(payload) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _num(value, config: RunConfig) -> str:
    return significant(value, config.print_digits, trim=True, max_decimals=config.print_digits)


def _emit(config: RunConfig, text: str):
    if config.output_path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(config.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ---- subcommands ----------------------------------------------------------


def cmd_moments(config: RunConfig) -> tuple[str, int]:
    table = moment_table(config.n_range[1], config.context())
    rows = [(n, _num(table[n], config)) for n in range(len(table))]
    if config.output_format == "json":
        return _json({"moments": [{"n": n, "value": v} for n, v in rows]}), EXIT_OK
    render = _csv if config.output_format == "csv" else _md
    return render(["n", "M(n)"], rows), EXIT_OK


def cmd_variational(config: RunConfig) -> tuple[str, int]:
    pot = PolynomialPotential.named(config.potential)
    lo, hi = config.n_range
    table = variational_table(pot, range(lo, hi + 1), config.context())
    if config.output_format == "csv":
        rows = [(N, l.n, l.parity.name, _num(l.value, config)) for N in table.sizes() for l in table.rows[N]]
        return _csv(["N", "n", "parity", "eigenvalue"], rows), EXIT_OK
    if config.output_format == "json":
        payload = {
            "potential": pot.label.value,
            "rows": [
                {"N": N, "levels": [{"n": l.n, "parity": l.parity.name, "value": _num(l.value, config)} for l in table.rows[N]]}
                for N in table.sizes()
            ],
        }
        return _json(payload), EXIT_OK
    width = max(len(table.rows[N]) for N in table.sizes())
    rows = []
    for N in table.sizes():
        cells = [_num(l.value, config) for l in table.rows[N]]
        rows.append([N] + cells + [""] * (width - len(cells)))
    return _md(["N"] + [f"n={n}" for n in range(width)], rows), EXIT_OK


def cmd_rpm(config: RunConfig) -> tuple[str, int]:
    pot = PolynomialPotential.named(config.potential)
    ctx = config.context()
    if config.dump_series is not None:
        count = 2 * config.D_max + config.d
        series = series_coefficients(pot, config.s, config.dump_series, count, ctx, reduced=config.reduced)
        rows = [(j, _num(f, config)) for j, f in enumerate(series.values)]
        name = "g" if config.reduced else "f"
        if config.output_format == "json":
            return _json({"E": str(config.dump_series), "coefficients": [{"j": j, name: f} for j, f in rows]}), EXIT_OK
        render = _csv if config.output_format == "csv" else _md
        return render(["j", f"{name}_j"], rows), EXIT_OK
    result = track_sequences(
        pot,
        config.s,
        config.D_max,
        config.d,
        window=config.window,
        ctx=ctx,
        grid_step=config.grid_step,
        reduced=config.reduced,
    )
    seqs = result.sequences
    good = [(i, q) for i, q in enumerate(seqs) if q.converged_ok]

    def err(q):
        return "" if q.error_estimate is None else significant(q.error_estimate, 3, trim=True)

    status = EXIT_OK if good else EXIT_NUMERICAL
    if config.output_format == "json":
        payload = {
            "potential": pot.label.value,
            "s": config.s,
            "d": config.d,
            "dmax": config.D_max,
            "expansion": "x2" if config.reduced else "half-line",
            "digits": result.digits,
            "sequences": [
                {
                    "sequence_id": i,
                    "converged": _num(q.converged, config),
                    "error_estimate": err(q),
                    "converged_ok": q.converged_ok,
                    "confirmed": q.confirmed,
                    "roots": [{"D": D, "root": _num(r, config)} for D, r in q.roots.items()],
                }
                for i, q in enumerate(seqs)
            ],
        }
        return _json(payload), status
    if config.output_format == "md":
        rows = [(i, _num(q.converged, config), err(q), "yes" if q.converged_ok else "no") for i, q in enumerate(seqs)]
        return _md(["sequence_id", "converged", "error_estimate", "converged_ok"], rows), status
    rows = [(i, D, _num(r, config), err(q)) for i, q in enumerate(seqs) for D, r in q.roots.items()]
    text = _csv(["sequence_id", "D", "root", "error_estimate"], rows)
    summary = [(i, _num(q.converged, config), err(q)) for i, q in good]
    return text + "\n" + _csv(["sequence_id", "converged", "error_estimate"], summary), status


def susy_report(config: RunConfig) -> dict:
    ctx = config.context()
    pot = PolynomialPotential.susy_minus()
    even = sector_spectrum(pot, 0, config.D_max, (0, 1), ctx, config.window)
    odd = sector_spectrum(pot, 1, config.D_max, (0, 1), ctx, config.window)
    N = config.n_range[1]
    var_ctx = PrecisionContext(max(50, ctx.decimal_digits // 2))
    var_minus = variational_table(PolynomialPotential.susy_minus(), [N], var_ctx)
    var_plus = variational_table(PolynomialPotential.susy_plus(), [N], var_ctx)
    spectrum = classify_roots(even.values, odd.values, var_minus, var_plus)
    report = degeneracy_report(spectrum)
    flags = interleaving_check(list(even.values), list(odd.values))
    digits = 25
    return {
        "pairs": [
            {
                "n": p.n,
                "e_minus": significant(p.e_minus, digits, trim=True),
                "e_plus_shifted": significant(p.e_plus_shifted, digits, trim=True),
                "residual": significant(p.residual, 3, trim=True),
            }
            for p in report.pairs
        ],
        "max_residual": None if report.max_residual is None else significant(report.max_residual, 3, trim=True),
        "interleaving_ok": bool(flags) and all(flags),
        "unclassified": [significant(e.value, digits, trim=True) for e in spectrum.unclassified],
    }


def cmd_susy_check(config: RunConfig) -> tuple[str, int]:
    payload = susy_report(config)
    ok = payload["interleaving_ok"] and payload["pairs"] and not payload["unclassified"]
    status = EXIT_OK if ok else EXIT_NUMERICAL
    if config.output_format == "json":
        return _json(payload), status
    rows = [(p["n"], p["e_minus"], p["e_plus_shifted"], p["residual"]) for p in payload["pairs"]]
    render = _csv if config.output_format == "csv" else _md
    return render(["n", "e_minus", "e_plus_shifted", "residual"], rows), status


def cmd_reproduce(config: RunConfig) -> tuple[str, int]:
    rpm_ctx = config.context()
    result = reproduce_table(config.table_id, D_max=config.D_max, rpm_ctx=rpm_ctx)
    golden = result.golden
    bad = {(m.row, m.column) for m in result.mismatches}
    for m in result.mismatches:
        print(f"mismatch {m.describe()}", file=sys.stderr)
    status = EXIT_OK if result.ok else EXIT_NUMERICAL
    if config.output_format == "md":
        rows = [[row] + [result.rendered(row, c) for c in golden.columns] for row, _ in golden.rows]
        return f"Table {golden.table_id}: {golden.title}\n\n" + _md([golden.row_header, *golden.columns], rows), status
    cells = [
        (row, column, printed, result.rendered(row, column), "no" if (row, column) in bad else "yes")
        for row, column, printed in golden.cells()
    ]
    if config.output_format == "csv":
        return _csv(["row", "column", "expected", "computed", "match"], cells), status
    payload = {
        "table": golden.table_id,
        "ok": result.ok,
        "cells": [
            {"row": r, "column": c, "expected": e, "computed": v, "match": m == "yes"} for r, c, e, v, m in cells
        ],
    }
    return _json(payload), status


COMMANDS = {
    "moments": cmd_moments,
    "variational": cmd_variational,
    "rpm": cmd_rpm,
    "susy-check": cmd_susy_check,
    "reproduce": cmd_reproduce,
}


def run(config: RunConfig) -> int:
    try:
        text, status = COMMANDS[config.subcommand](config)
    except InvalidConfig as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SpectraError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    _emit(config, text)
    return status


def main(argv=None) -> int:
    try:
        config = build_config(argv)
    except InvalidConfig as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if config.verbose else logging.WARNING, format="%(message)s")
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
