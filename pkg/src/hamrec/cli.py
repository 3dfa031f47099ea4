"""``hamrec`` command line: synthesize, sweep, simulate, certify, sdp-sweep.

Every subcommand writes one CSV or JSON artifact (stdout unless --out) and
exits 0 only when its own verification checks pass.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass

import numpy as np

from .protocols import (
    XYZ,
    XZ,
    build_binary_circuit,
    build_ternary_circuit,
    guess_probabilities,
    outcome_distribution,
    sample_shots,
)
from .qsp_synthesis import SynthesisError, roundtrip_error, synthesize
from .quantum_core import BlochHamiltonian, DomainError, as_hamiltonian
from .tester_sdp import (
    ResourceError,
    binary_certificate,
    general_axis_sweep,
    helstrom_oracle,
    ternary_certificate,
)

DEFAULTS = {
    "k": 1,
    "protocol": "binary",
    "axis": "z",
    "theta": float(np.pi / 2),
    "theta_start": 0.0,
    "theta_end": float(np.pi),
    "grid": 101,
    "shots": 1000,
    "seed": 0,
    "out": None,
    "format": None,
}
ROUNDTRIP_TOL = 1e-8


@dataclass
class RunConfig:
    command: str
    k: int
    protocol: str
    axis: str
    theta: float
    theta_start: float
    theta_end: float
    grid: int
    shots: int
    seed: int
    out: str | None
    format: str

    def validate(self):
        if self.k < 1:
            raise DomainError("k must be at least 1")
        if self.grid < 2:
            raise DomainError("grid needs at least 2 points")
        if self.shots < 1:
            raise DomainError("shots must be at least 1")
        if self.protocol not in ("binary", "ternary"):
            raise DomainError("protocol is binary or ternary")
        if self.protocol == "ternary" and self.command in ("sweep", "simulate") and self.k % 2 == 0:
            raise DomainError("the ternary protocol needs odd k")
        if self.command == "sdp-sweep" and self.k not in (1, 3):
            raise DomainError("sdp-sweep supports k in {1, 3}")


def fmt(v) -> str:
    return f"{float(v):.12g}"


def _round(obj):
    if isinstance(obj, float):
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def parse_axis(text: str) -> BlochHamiltonian:
    text = str(text).strip()
    if text.lower() in ("x", "y", "z"):
        return as_hamiltonian(text.lower())
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise DomainError(f"axis must be x, y, z or 'nx,ny,nz', got {text!r}")
    return BlochHamiltonian.normalized(parts)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(_round(obj), indent=2, sort_keys=True) + "\n"


def _table(cfg: RunConfig, header, rows) -> str:
    if cfg.format == "json":
        return _json_text([dict(zip(header, r)) for r in rows])
    return _csv_text(header, rows)


# --------------------------------------------------------------------------
# subcommands; each returns (text, checks_passed)


def cmd_synthesize(cfg: RunConfig):
    phases = synthesize(cfg.k)
    err = roundtrip_error(phases)
    target = "2/(k+1) sum_{l odd} T_l(a)" if phases.convention == "odd" else "(1/(k+1)) sum_{l even} z^l"
    doc = {
        "k": cfg.k,
        "convention": phases.convention,
        "phases": list(phases.phases),
        "phase_sum": float(np.sum(phases.phases)),
        "target": target,
        "roundtrip_error": err,
    }
    return _json_text(doc), err <= ROUNDTRIP_TOL


def _circuit(cfg: RunConfig):
    if cfg.protocol == "binary":
        return build_binary_circuit(cfg.k), XZ
    return build_ternary_circuit(cfg.k), XYZ


def cmd_sweep(cfg: RunConfig):
    circuit, hyps = _circuit(cfg)
    thetas = np.linspace(cfg.theta_start, cfg.theta_end, cfg.grid)
    cols = [guess_probabilities(circuit, ax, thetas)[lab] for lab, ax in zip(hyps.labels, hyps.axes)]
    header = ["theta"] + [f"success_{lab}" for lab in hyps.labels]
    rows = [[float(t)] + [float(c[i]) for c in cols] for i, t in enumerate(thetas)]
    ok = len(rows) == cfg.grid and all(-1e-12 <= v <= 1 + 1e-12 for r in rows for v in r[1:])
    return _table(cfg, header, rows), ok


def cmd_simulate(cfg: RunConfig):
    circuit, _ = _circuit(cfg)
    hidden = parse_axis(cfg.axis)
    counts = sample_shots(circuit, hidden, cfg.theta, cfg.shots, cfg.seed)
    exact = outcome_distribution(circuit, hidden, cfg.theta)
    guesses = {lab: 0 for lab in circuit.labels}
    for s, c in counts.items():
        guesses[circuit.decision[s]] += c
    doc = {
        "k": cfg.k,
        "protocol": cfg.protocol,
        "axis": list(hidden.axis),
        "theta": cfg.theta,
        "shots": cfg.shots,
        "seed": cfg.seed,
        "counts": counts,
        "exact_probabilities": exact,
        "guess_frequencies": {lab: c / cfg.shots for lab, c in guesses.items()},
    }
    ok = sum(counts.values()) == cfg.shots and abs(sum(exact.values()) - 1) <= 1e-10
    return _json_text(doc), ok


def cmd_certify(cfg: RunConfig):
    if cfg.protocol == "binary":
        cert = binary_certificate(cfg.k, strict=False)
    else:
        cert = ternary_certificate(cfg.k, strict=False)
    doc = cert.to_dict()
    doc["status"] = "PASS" if cert.passed else "FAIL"
    if not cert.passed:
        failing = [name for r in cert.reports for name in r.failures()]
        failing += [f"slack {lab}" for lab, v in cert.slack_min_eigs.items() if v < -1e-9]
        doc["violations"] = failing
    return _json_text(doc), cert.passed


def cmd_sdp_sweep(cfg: RunConfig):
    rows = general_axis_sweep(cfg.k, points=cfg.grid)
    alphas = np.array([r.alpha for r in rows])
    probe = int(np.argmin(np.abs(alphas - np.pi / 3))) if cfg.k == 1 else None
    out = []
    ok = True
    for i, r in enumerate(rows):
        oracle = ""
        if i == probe and r.error is None:
            oracle = helstrom_oracle(r.axis, seed=cfg.seed)
            ok &= abs(oracle - r.optimal) <= 1e-3
        ok &= r.ordered
        out.append([r.alpha, *r.axis, r.optimal, r.fixed, r.guess, oracle, "ok" if r.error is None else r.error])
    header = ["alpha", "n0_x", "n0_y", "n0_z", "optimal", "fixed", "guess", "oracle", "status"]
    return _table(cfg, header, out), bool(ok)


COMMANDS = {
    "synthesize": (cmd_synthesize, "json"),
    "sweep": (cmd_sweep, "csv"),
    "simulate": (cmd_simulate, "json"),
    "certify": (cmd_certify, "json"),
    "sdp-sweep": (cmd_sdp_sweep, "csv"),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hamrec", description="Hamiltonian recognition toolkit")
    sub = p.add_subparsers(dest="command", required=True)
    blurbs = {
        "synthesize": "write the QSP phase sequence for k slots",
        "sweep": "success probability per hypothesis on a theta grid",
        "simulate": "sample shots of the recognition circuit",
        "certify": "build and verify the dual optimality certificate",
        "sdp-sweep": "optimal vs fixed-protocol success for tilted axes",
    }
    for name in COMMANDS:
        s = sub.add_parser(name, help=blurbs[name])
        s.add_argument("--k", type=int, help="number of queries (default 1)")
        s.add_argument("--protocol", choices=["binary", "ternary"])
        s.add_argument("--axis", help='hidden axis: x, y, z or "nx,ny,nz"')
        s.add_argument("--theta", type=float, help="evolution angle for simulate")
        s.add_argument("--theta-start", dest="theta_start", type=float)
        s.add_argument("--theta-end", dest="theta_end", type=float)
        s.add_argument("--grid", type=int, help="number of grid points")
        s.add_argument("--shots", type=int)
        s.add_argument("--seed", type=int)
        s.add_argument("--out", help="output file (stdout if omitted)")
        s.add_argument("--format", choices=["csv", "json"])
        s.add_argument("--config", help="JSON file of defaults; flags take precedence")
    return p


def resolve_config(args: argparse.Namespace) -> RunConfig:
    merged = dict(DEFAULTS)
    if args.config:
        with open(args.config) as fh:
            file_cfg = json.load(fh)
        unknown = set(file_cfg) - set(DEFAULTS)
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        merged.update(file_cfg)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    if merged["format"] is None:
        merged["format"] = COMMANDS[args.command][1]
    cfg = RunConfig(command=args.command, **merged)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        func = COMMANDS[cfg.command][0]
        text, ok = func(cfg)
    except (DomainError, ResourceError, SynthesisError, OSError, ValueError) as exc:
        print(f"hamrec {args.command}: {exc}", file=sys.stderr)
        return 2
    if cfg.out:
        with open(cfg.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if not ok:
        print(f"hamrec {cfg.command}: verification checks failed", file=sys.stderr)
    return 0 if ok else 1


def config_dict(cfg: RunConfig) -> dict:
    return asdict(cfg)


if __name__ == "__main__":
    raise SystemExit(main())
