"""Command-line tables for every study in the package.

One flag-driven entry point; each command writes a single table, CSV or
JSON, with a fixed column order and full-precision decimal strings, so
reruns of the same configuration are byte-identical.  A JSON manifest
sidecar records the configuration echo, precision, node counts, and wall
times; the timings are volatile by nature and the manifest is therefore
excluded from the byte-identity contract.

Exit codes: 0 success, 1 bad usage or failed validation, 2 when --check
is set and a checked residual exceeds its tolerance.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass
from decimal import Decimal, InvalidOperation

from mpmath import mp

from .dynamics import TableFamily, derivative_bundle, logdp_residual, \
    riccati_residuals, second_order_residuals
from .errors import JacgapError
from .fredholm import scaling_convergence, sigma_oracle, sigma_pv_residual, \
    sine_sigma_residual
from .gap import gap_probability, hankel_gap_probability, hn_ode_report, \
    mc_gap_probability
from .ladder import aux_residuals, identity_sweep
from .numerics import Precision
from .orthopoly import build_table
from .weight import WeightParams
from . import __version__

__all__ = ["RunConfig", "DEFAULT_TOLERANCES", "run", "main"]

COMMANDS = ("gap-table", "verify-identities", "ode-residuals",
            "scaling-scan", "fredholm-sigma", "mc-check")

_IDENTITY_KEYS = ("S1", "S2", "S2p", "s11", "s12", "s21", "s22",
                  "rn", "rn1", "eq3", "eq4", "eq5", "pna")
_AUX_KEYS = ("aux1", "aux2")
_ODE_KEYS = ("fd_beta_dev", "fd_h_dev", "fd_logdp_dev",
             "res_ri", "res_rnp2", "res_bep", "res_beta1",
             "res_R_ode", "res_cha", "res_rnbn", "res_equ3",
             "res_equ4", "res_rna", "res_hna")

# Default check tolerances.  Identity and dynamics values follow the
# package's own acceptance settings at 256 bits; scaling_factor bounds
# error/max(|sigma|, 0.1) at the largest n of a scan; mc_sigmas is the
# allowed deviation in standard errors.
DEFAULT_TOLERANCES = {
    **{k: "1e-30" for k in _IDENTITY_KEYS},
    **{k: "1e-30" for k in _AUX_KEYS},
    "fd_beta_dev": "1e-18", "fd_h_dev": "1e-18", "fd_logdp_dev": "1e-18",
    "res_ri": "1e-18", "res_rnp2": "1e-18", "res_bep": "1e-18",
    "res_beta1": "1e-18",
    "res_R_ode": "1e-10", "res_cha": "1e-10", "res_rnbn": "1e-10",
    "res_equ3": "1e-10", "res_equ4": "1e-10", "res_rna": "1e-12",
    "res_hna": "1e-10",
    "hankel": "1e-50",
    "sine_form": "1e-30",
    "scaling_factor": "0.02",
    "mc_sigmas": "3",
}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Parsed command line; every field is already-serialized (strings,
    ints, bools), so asdict/from_dict round-trips losslessly."""

    command: str
    alpha: str | None = None
    n: int | None = None
    n_list: tuple[int, ...] | None = None
    a: str | None = None
    a_grid: str | None = None
    t_list: tuple[str, ...] | None = None
    bits: int = 256
    seed: int = 0
    samples: int = 1_000_000
    out: str | None = None
    format: str = "csv"
    check: bool = False
    tol_file: str | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_list"] = list(self.n_list) if self.n_list is not None else None
        d["t_list"] = list(self.t_list) if self.t_list is not None else None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        if d.get("n_list") is not None:
            d["n_list"] = tuple(d["n_list"])
        if d.get("t_list") is not None:
            d["t_list"] = tuple(d["t_list"])
        return cls(**d)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="jacgap", description=__doc__.splitlines()[0],
                formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--command", required=True, choices=COMMANDS)
    p.add_argument("--alpha", help="weight exponent, a decimal string > 0")
    p.add_argument("--n", type=int, help="single degree / matrix size")
    p.add_argument("--n-list", help="comma-separated degrees, e.g. 20,40,80")
    p.add_argument("--a", help="half-gap, a decimal string in [0, 1)")
    p.add_argument("--a-grid", help="half-gap grid lo:hi:step, decimal strings")
    p.add_argument("--t-list", help="comma-separated scaled gap sizes")
    p.add_argument("--bits", type=int, default=256, help="working precision")
    p.add_argument("--seed", type=int, default=0, help="Monte Carlo seed")
    p.add_argument("--samples", type=int, default=1_000_000,
                   help="Monte Carlo sample count")
    p.add_argument("--out", help="output path; stdout when omitted")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--check", action="store_true",
                   help="exit 2 if any checked residual exceeds tolerance")
    p.add_argument("--tol-file", help="JSON file overriding DEFAULT_TOLERANCES")
    return p


def _parse_int_list(text: str, what: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise UsageError(f"bad {what}: {text!r}") from exc
    if not values:
        raise UsageError(f"empty {what}")
    return values


def _parse_str_list(text: str, what: str) -> tuple[str, ...]:
    values = tuple(part.strip() for part in text.split(","))
    if not all(values):
        raise UsageError(f"empty entry in {what}: {text!r}")
    return values


def parse_config(argv) -> RunConfig:
    ns = _build_parser().parse_args(argv)
    return RunConfig(
        command=ns.command,
        alpha=ns.alpha,
        n=ns.n,
        n_list=_parse_int_list(ns.n_list, "--n-list") if ns.n_list else None,
        a=ns.a,
        a_grid=ns.a_grid,
        t_list=_parse_str_list(ns.t_list, "--t-list") if ns.t_list else None,
        bits=ns.bits,
        seed=ns.seed,
        samples=ns.samples,
        out=ns.out,
        format=ns.format,
        check=ns.check,
        tol_file=ns.tol_file,
    )


def _need(cfg: RunConfig, **fields):
    for name, why in fields.items():
        if getattr(cfg, name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required {why}")


def _a_values(cfg: RunConfig):
    """The half-gap grid as exact decimal strings."""
    if (cfg.a is None) == (cfg.a_grid is None):
        raise UsageError("give exactly one of --a / --a-grid")
    if cfg.a is not None:
        return [cfg.a]
    parts = cfg.a_grid.split(":")
    if len(parts) != 3:
        raise UsageError("--a-grid wants lo:hi:step")
    try:
        lo, hi, step = (Decimal(part) for part in parts)
    except InvalidOperation as exc:
        raise UsageError(f"bad --a-grid: {cfg.a_grid!r}") from exc
    if not (step > 0 and lo <= hi):
        raise UsageError("--a-grid wants lo <= hi and step > 0")
    values = []
    k = 0
    while lo + k * step <= hi:  # exact decimal arithmetic, no drift
        values.append(str(lo + k * step))
        k += 1
    return values


def _n_values(cfg: RunConfig):
    if (cfg.n is None) == (cfg.n_list is None):
        raise UsageError("give exactly one of --n / --n-list")
    return [cfg.n] if cfg.n is not None else list(cfg.n_list)


def _tolerances(cfg: RunConfig):
    table = dict(DEFAULT_TOLERANCES)
    if cfg.tol_file is not None:
        with open(cfg.tol_file, "r", encoding="utf-8") as fh:
            overrides = json.load(fh)
        for key, value in overrides.items():
            if key not in table:
                raise UsageError(f"unknown tolerance key {key!r}")
            table[key] = str(value)
    return {k: mp.mpf(v) for k, v in table.items()}


# each command returns (columns, rows, checks, node_counts); rows hold raw
# values, checks are (tolerance key, normalized measured value) pairs.

def _cmd_gap_table(cfg: RunConfig, prec: Precision):
    _need(cfg, alpha="for gap-table")
    ns = sorted(set(_n_values(cfg)))
    rows, checks = [], []
    nodes = {}
    for a_str in _a_values(cfg):
        wp = WeightParams(cfg.alpha, a_str)
        table = build_table(wp, max(ns), prec)
        nodes[f"a={a_str}"] = table.nodes_per_interval
        for n in ns:
            res = gap_probability(wp, n, prec)
            rows.append([res.a, n, res.prob, res.H, res.logdP])
            if n <= 12:
                hank = hankel_gap_probability(wp, n, prec)
                checks.append(("hankel", abs(hank - res.prob) / res.prob))
    return ["a", "n", "P", "H", "logdP"], rows, checks, nodes


def _cmd_verify_identities(cfg: RunConfig, prec: Precision):
    _need(cfg, alpha="for verify-identities")
    ns = _n_values(cfg)
    if cfg.n is not None:
        if cfg.n < 2:
            raise UsageError("--n must be >= 2 (sweep covers 1..n-1)")
        ns = list(range(1, cfg.n))
    n_max = max(ns) + 1
    columns = ["alpha", "a", "n", *_IDENTITY_KEYS, *_AUX_KEYS]
    rows, checks = [], []
    nodes = {}
    worst = {k: mp.mpf(0) for k in (*_IDENTITY_KEYS, *_AUX_KEYS)}
    for a_str in _a_values(cfg):
        wp = WeightParams(cfg.alpha, a_str)
        table = build_table(wp, n_max, prec)
        nodes[f"a={a_str}"] = table.nodes_per_interval
        sweep = identity_sweep(table, min(ns), max(ns))
        for n in ns:
            res = dict(sweep[n])
            res.update(aux_residuals(table, n))
            rows.append([wp.alpha, wp.a, n] + [res[k] for k in worst])
            for k in worst:
                worst[k] = max(worst[k], res[k])
    checks.extend(worst.items())
    return columns, rows, checks, nodes


def _cmd_ode_residuals(cfg: RunConfig, prec: Precision):
    _need(cfg, alpha="for ode-residuals")
    ns = sorted(set(_n_values(cfg)))
    columns = ["alpha", "a", "n", *_ODE_KEYS]
    rows, checks = [], []
    nodes = {}
    worst = {k: mp.mpf(0) for k in _ODE_KEYS}
    for a_str in _a_values(cfg):
        with mp.workprec(prec.bits):
            if not mp.mpf(a_str) > 0:
                raise UsageError("ode-residuals needs probe points a > 0")
        family = TableFamily(cfg.alpha, a_str, max(ns), prec)
        nodes[f"a={a_str}"] = family.table(0).nodes_per_interval
        for n in ns:
            with mp.workprec(prec.bits):
                fd = derivative_bundle(family, n, mode="fd")
                an = derivative_bundle(family, n, mode="analytic")
                res = {
                    "fd_beta_dev": abs(fd.beta_p - an.beta_p) / abs(an.beta_p),
                    "fd_h_dev": abs(fd.h_p - an.h_p) / abs(an.h_p),
                    "fd_logdp_dev": logdp_residual(family, n),
                }
                res.update(riccati_residuals(family, n))
                so = second_order_residuals(family, n)
                res.update(so)
                rep = hn_ode_report(family, n)
                res["res_equ4"] = rep.res_equ4
                res["res_rna"] = rep.res_rna
                res["res_hna"] = rep.res_hna
                rows.append([family.alpha, family.a, n] + [res[k] for k in _ODE_KEYS])
                for k in _ODE_KEYS:
                    worst[k] = max(worst[k], res[k])
    checks.extend(worst.items())
    return columns, rows, checks, nodes


def _cmd_scaling_scan(cfg: RunConfig, prec: Precision):
    _need(cfg, alpha="for scaling-scan", n_list="for scaling-scan",
          t_list="for scaling-scan")
    data = scaling_convergence(cfg.alpha, list(cfg.n_list), list(cfg.t_list), prec)
    rows = [[row["n"], row["t"], row["sigma_n"], row["sigma_oracle"], row["error"]]
            for row in data]
    n_top = max(cfg.n_list)
    checks = []
    with mp.workprec(prec.bits):
        factors = [row["error"] / max(abs(row["sigma_oracle"]), mp.mpf("0.1"))
                   for row in data if row["n"] == n_top]
        checks.append(("scaling_factor", max(factors)))
    return ["n", "t", "sigma_n", "sigma_oracle", "error"], rows, checks, {}


def _cmd_fredholm_sigma(cfg: RunConfig, prec: Precision):
    _need(cfg, t_list="for fredholm-sigma")
    columns = ["t", "det", "sigma", "pv_residual", "sine_residual"]
    rows, checks = [], []
    nodes = {}
    with mp.workprec(prec.bits):
        worst = mp.mpf(0)
        for t_str in cfg.t_list:
            orc = sigma_oracle(mp.mpf(t_str), prec)
            pv = sigma_pv_residual(orc.sigma, orc.sigma_p, orc.sigma_pp, orc.t)
            sine = sine_sigma_residual(orc.sigma, orc.sigma_p, orc.sigma_pp, orc.t)
            rows.append([orc.t, orc.det_value, orc.sigma, pv, sine])
            nodes[f"t={t_str}"] = orc.nodes_used
            u = orc.sigma - orc.t * orc.sigma_p
            scale = max((orc.t * orc.sigma_pp) ** 2, 16 * u * u,
                        abs(4 * u * orc.sigma_p ** 2), mp.mpf(1))
            worst = max(worst, abs(sine) / scale)
        checks.append(("sine_form", worst))
    return columns, rows, checks, nodes


def _cmd_mc_check(cfg: RunConfig, prec: Precision):
    _need(cfg, alpha="for mc-check", a="for mc-check", n="for mc-check")
    wp = WeightParams(cfg.alpha, cfg.a)
    est, stderr = mc_gap_probability(wp, cfg.n, cfg.samples, cfg.seed)
    ref = gap_probability(wp, cfg.n, prec).prob
    with mp.workprec(prec.bits):
        deviation = abs(mp.mpf(est) - ref) / mp.mpf(stderr)
    return (["estimate", "stderr", "reference"],
            [[mp.mpf(repr(est)), mp.mpf(repr(stderr)), ref]],
            [("mc_sigmas", deviation)], {})


_COMMANDS = {
    "gap-table": _cmd_gap_table,
    "verify-identities": _cmd_verify_identities,
    "ode-residuals": _cmd_ode_residuals,
    "scaling-scan": _cmd_scaling_scan,
    "fredholm-sigma": _cmd_fredholm_sigma,
    "mc-check": _cmd_mc_check,
}


def _format_value(value, digits: int) -> str:
    if isinstance(value, int):
        return str(value)
    return mp.nstr(value, digits)


def _render(columns, rows, fmt: str, digits: int) -> str:
    text_rows = [[_format_value(v, digits) for v in row] for row in rows]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)  # RFC-4180: CRLF line endings, quoted as needed
        writer.writerow(columns)
        writer.writerows(text_rows)
        return buf.getvalue()
    payload = {"columns": list(columns), "rows": text_rows}
    return json.dumps(payload, indent=2) + "\n"


def run(cfg: RunConfig) -> int:
    if cfg.bits < 64:
        raise UsageError("--bits must be at least 64")
    prec = Precision(cfg.bits)
    tolerances = _tolerances(cfg)
    digits = math.ceil(cfg.bits * math.log10(2))
    started = time.time()
    columns, rows, checks, nodes = _COMMANDS[cfg.command](cfg, prec)
    elapsed = time.time() - started
    text = _render(columns, rows, cfg.format, digits)

    if cfg.out is None:
        sys.stdout.write(text)
    else:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        manifest = {
            "tool": "jacgap",
            "version": __version__,
            "config": cfg.to_dict(),
            "bits": cfg.bits,
            "digits": digits,
            "rows_written": len(rows),
            "node_counts": nodes,
            "checks": [
                {
                    "key": key,
                    "value": mp.nstr(value, 12),
                    "tolerance": mp.nstr(tolerances[key], 12),
                    "pass": bool(value <= tolerances[key]),
                }
                for key, value in checks
            ],
            # wall-clock seconds; volatile, excluded from byte-identity
            "timings_seconds": {"total": round(elapsed, 3)},
        }
        with open(cfg.out + ".manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")

    if cfg.check:
        failed = [(key, value) for key, value in checks if value > tolerances[key]]
        if failed:
            for key, value in failed:
                sys.stderr.write(
                    f"check failed: {key} = {mp.nstr(value, 8)} "
                    f"> {mp.nstr(tolerances[key], 8)}\n")
            return 2
    return 0


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
        return run(cfg)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except (JacgapError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
