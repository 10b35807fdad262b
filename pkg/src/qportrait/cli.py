"""Command-line interface: ``qportrait <command> ...``.

Exit codes: 0 success, 1 usage/config/input error, 2 inequality violations.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .campaign import INEQUALITIES, CampaignConfig, run_campaign, write_report
from .entropy import quantum_relative_entropy, subadditivity_margin, von_neumann
from .errors import ConfigError, PortraitError
from .linalg import read_matrix_file, validate_density
from .portrait import MergeMap, portrait_density, qutrit_standard_maps
from .tomography import OptimizerConfig, min_tomographic_entropy, tomogram, tomogram_spectral

EXIT_OK, EXIT_USAGE, EXIT_VIOLATIONS = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(z: complex) -> str:
    if abs(z.imag) < 5e-13:
        return f"{z.real: .6f}"
    return f"{z.real: .6f}{z.imag:+.6f}j"


def _print_matrix(name: str, m, out) -> None:
    m = np.asarray(m)
    print(f"{name} =", file=out)
    for row in m:
        print("  [" + "  ".join(_fmt(complex(z)) for z in row) + "]", file=out)


class _Units:
    def __init__(self, bits: bool):
        self.scale = 1 / math.log(2) if bits else 1.0
        self.unit = "bits" if bits else "nats"

    def __call__(self, x: float) -> str:
        return "inf" if math.isinf(x) else f"{x * self.scale:.6f}"


def _load_state(path):
    return validate_density(read_matrix_file(path))


def cmd_portrait(args, out) -> int:
    rho = _load_state(args.state)
    units = _Units(args.bits)
    if args.map:
        maps = [MergeMap.from_json(json.loads(Path(args.map).read_text()))]
    else:
        if rho.dim != 3:
            raise ConfigError("the standard portraits need a 3x3 state; pass --map for other dimensions")
        maps = list(qutrit_standard_maps())
    for i, m in enumerate(maps, 1):
        p = portrait_density(m, rho)
        shown = p.matrix
        if args.padded:
            shown = np.zeros((rho.dim, rho.dim), complex)
            shown[: p.dim, : p.dim] = p.matrix
        _print_matrix(f"rho{i}", shown, out)
        print(f"S(rho{i}) = {units(von_neumann(p))} {units.unit}", file=out)
    return EXIT_OK


def cmd_entropy(args, out) -> int:
    rho = _load_state(args.state)
    units = _Units(args.bits)
    print(f"S = {units(von_neumann(rho))}", file=out)
    if rho.dim == 3:
        r1, r2 = (portrait_density(m, rho) for m in qutrit_standard_maps())
        _, info = subadditivity_margin(rho)
        print(f"S1 = {units(von_neumann(r1))}", file=out)
        print(f"S2 = {units(von_neumann(r2))}", file=out)
        print(f"I_q = {units(info)}", file=out)
        print(f"D(rho1||rho2) = {units(quantum_relative_entropy(r1, r2))}", file=out)
    print(f"units: {units.unit}", file=out)
    return EXIT_OK


def cmd_tomogram(args, out) -> int:
    rho = _load_state(args.state)
    u = read_matrix_file(args.unitary)
    direct = tomogram(rho, u).w.p
    spectral = tomogram_spectral(rho, u).w.p
    print("w = [" + ", ".join(f"{x:.6f}" for x in direct) + "]", file=out)
    print("w_spectral = [" + ", ".join(f"{x:.6f}" for x in spectral) + "]", file=out)
    print(f"max |w - w_spectral| = {np.abs(direct - spectral).max():.3e}", file=out)
    return EXIT_OK


def cmd_tomomin(args, out) -> int:
    rho = _load_state(args.state)
    cfg = OptimizerConfig(restarts=args.restarts, max_iters=args.max_iters, tol=args.opt_tol, seed=args.seed)
    res = min_tomographic_entropy(rho, cfg)
    print(f"min H(w) = {res.min_entropy:.12f}", file=out)
    print(f"S(rho) = {res.von_neumann:.12f}", file=out)
    print(f"certificate = {res.certificate:.3e}", file=out)
    print(f"argmin = {json.dumps(res.argmin.to_json())}", file=out)
    return EXIT_OK


_VERIFY_FLAGS = {
    "inequality": "inequality",
    "trials": "trials",
    "dim": "dim",
    "rank": "rank",
    "seed": "seed",
    "streams": "stream_offset",
    "tol": "tolerance",
    "out": "out",
    "format": "format",
    "workers": "workers",
    "dump_margins": "dump_margins",
    "restarts": "restarts",
    "max_iters": "max_iters",
    "opt_tol": "opt_tol",
}


def build_config(args) -> CampaignConfig:
    values = {}
    if args.config:
        try:
            values = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(values, dict):
            raise ConfigError("config file must hold a JSON object")
    for flag, name in _VERIFY_FLAGS.items():
        v = getattr(args, flag)
        if v is not None:
            values[name] = v
    if args.alpha is not None and args.q is not None:
        raise ConfigError("give either --alpha or --q, not both")
    if args.alpha is not None or args.q is not None:
        values["order"] = args.alpha if args.alpha is not None else args.q
    if "inequality" not in values:
        raise ConfigError("--inequality is required (or give it in --config)")
    return CampaignConfig.from_json(values)


def cmd_verify(args, out) -> int:
    cfg = build_config(args)
    report = run_campaign(cfg)
    if cfg.out:
        write_report(report, cfg.out, cfg.format)
    print(
        f"{cfg.inequality}: trials={report.trials_run} violations={report.violations} "
        f"errored={report.errored} infinite={report.infinite_margins} "
        f"min_margin={report.min_margin} ({report.wall_time_s:.2f}s)",
        file=out,
    )
    return EXIT_VIOLATIONS if report.violations > 0 else EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qportrait", description="Portrait maps and entropic inequalities for qudit states.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("portrait", help="portraits of a state file")
    sp.add_argument("--state", required=True)
    sp.add_argument("--map", help="MergeMap JSON file (default: the two qutrit portraits)")
    sp.add_argument("--padded", action="store_true", help="show portraits zero-padded to the input size")
    sp.add_argument("--bits", action="store_true")
    sp.set_defaults(func=cmd_portrait)

    sp = sub.add_parser("entropy", help="entropies, I_q and relative entropy of a state file")
    sp.add_argument("--state", required=True)
    sp.add_argument("--bits", action="store_true")
    sp.set_defaults(func=cmd_entropy)

    sp = sub.add_parser("tomogram", help="tomogram of a state in a rotated basis")
    sp.add_argument("--state", required=True)
    sp.add_argument("--unitary", required=True)
    sp.set_defaults(func=cmd_tomogram)

    sp = sub.add_parser("tomomin", help="minimize tomogram entropy over unitaries")
    sp.add_argument("--state", required=True)
    sp.add_argument("--restarts", type=int, default=20)
    sp.add_argument("--max-iters", type=int, default=2000)
    sp.add_argument("--opt-tol", type=float, default=1e-6)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_tomomin)

    sp = sub.add_parser("verify", help="run a seeded verification campaign")
    sp.add_argument("--config", help="JSON config file; flags override its fields")
    sp.add_argument("--inequality", choices=INEQUALITIES)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--dim", type=int)
    sp.add_argument("--rank", type=int)
    sp.add_argument("--alpha", type=float, help="Renyi order")
    sp.add_argument("--q", type=float, help="Tsallis order")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--streams", type=int, help="first stream index (trial i uses stream offset + i)")
    sp.add_argument("--tol", type=float)
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("json", "csv"))
    sp.add_argument("--workers", type=int)
    sp.add_argument("--dump-margins")
    sp.add_argument("--restarts", type=int)
    sp.add_argument("--max-iters", type=int)
    sp.add_argument("--opt-tol", type=float)
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, sys.stdout)
    except (PortraitError, OSError) as exc:
        print(f"qportrait {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
