"""Batch command-line front end.

Subcommands: response (sweep one topology probe to CSV), verify (closed form
vs nodal-analysis oracle), poles (pole/f0/Q report), bank-design (filter-bank
JSON), bank-run (WAV to feature CSV). Exit codes: 0 success, 1 verification or
processing failure, 2 usage error. Output files are written atomically.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from .analysis import FrequencyGrid, compare, sweep_tf
from .errors import GmclabError
from .filterbank import (
    FilterBankSpec,
    build_discrete_bank,
    filter_outputs,
    read_wav,
    run_bank,
)
from .mna import response as mna_response
from .tf import poles as tf_poles
from .topologies import PAPER_PRESETS, TOPOLOGIES, build, params_from_json, paper_bundle

_SI_SUFFIXES = {
    "f": 1e-15, "p": 1e-12, "n": 1e-9, "u": 1e-6, "µ": 1e-6,
    "m": 1e-3, "k": 1e3, "M": 1e6,
}

# flag name -> element key used by the constructors
_ELEMENT_FLAGS = {
    "gm1": "gm1", "gm2": "gm2", "gm3": "gm3", "gm4": "gm4", "gm5": "gm5",
    "c1": "c1", "c2": "c2", "cpar": "c_par", "cf": "c_f", "cl": "c_l",
    "cin": "c_in", "gds1": "gds1", "gdsb": "gdsb",
}

_REQUIRED_ELEMENTS = {
    "sf": ("gm1", "c1"),
    "ota-lpf": ("gm1", "gm2", "gm3", "c1", "c2"),
    "ota-bpf": ("gm1", "gm2", "gm3", "c1", "c2", "gm4", "gm5", "c_par"),
    "ccia-bpf": ("gm1", "gm2", "c1", "c2", "c_f"),
    "xsf": ("gm1", "gm2", "c1", "c2"),
    "xsf-bpf": ("gm1", "gm2", "gm3", "c_in", "c_f", "c_l"),
    "ssf": ("gm1", "gm2", "c1", "c2"),
    "fvf": ("gm1", "gm2", "c1", "c2"),
}

_OPTIONAL_ELEMENTS = {"sf": ("gds1", "gdsb")}

_PROBE_PREFERENCE = ("LPF", "BPF", "OUT", "Z", "X", "GmX")


class UsageError(Exception):
    """Bad flags or values; maps to exit code 2."""


def parse_si(text: str) -> float:
    """Parse '253.2n', '2p', '1M', '4.7u' and plain floats (case-sensitive)."""
    t = text.strip()
    mult = 1.0
    if t and t[-1] in _SI_SUFFIXES:
        mult = _SI_SUFFIXES[t[-1]]
        t = t[:-1]
    try:
        value = float(t)
    except ValueError:
        raise UsageError(f"cannot parse number {text!r}") from None
    if not math.isfinite(value):
        raise UsageError(f"number {text!r} is not finite")
    return value * mult


def _positive(text: str, flag: str, allow_zero: bool = False) -> float:
    value = parse_si(text)
    if value < 0 or (value == 0 and not allow_zero):
        raise UsageError(f"{flag} must be {'non-negative' if allow_zero else 'positive'}, got {text!r}")
    return value


def _write_atomic(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _preset_key(topology: str, variant: str | None) -> str:
    if topology in ("ssf", "fvf"):
        if variant is None:
            raise UsageError(f"--type I|II is required for {topology}")
        return f"{topology}-{variant.lower()}"
    return topology


def _gather_bundle(args):
    """Build a TopologyBundle from --params, --preset, and/or element flags."""
    topology = args.topology
    variant = getattr(args, "type", None)
    elements: dict[str, float] = {}

    if getattr(args, "params", None):
        with open(args.params) as fh:
            record = params_from_json(fh.read())
        topology = topology or record["topology"]
        variant = variant or record.get("variant")
        elements.update(record["elements"])

    if topology is None:
        raise UsageError("--topology is required (or provide --params)")
    if topology not in TOPOLOGIES:
        raise UsageError(f"unknown topology {topology!r}; expected one of {', '.join(TOPOLOGIES)}")

    if getattr(args, "preset", None):
        preset = PAPER_PRESETS[_preset_key(topology, variant)]
        variant = preset["variant"]
        elements.update(preset["elements"])

    required = _REQUIRED_ELEMENTS[topology]
    optional = _OPTIONAL_ELEMENTS.get(topology, ())
    for flag, key in _ELEMENT_FLAGS.items():
        raw = getattr(args, flag, None)
        if raw is None:
            continue
        if key not in required and key not in optional:
            raise UsageError(f"--{flag} does not apply to topology {topology!r}")
        elements[key] = _positive(raw, f"--{flag}", allow_zero=key in ("gds1", "gdsb", "gm3"))

    missing = [k for k in required if k not in elements]
    if missing:
        raise UsageError(
            f"{topology} needs element values for: {', '.join(missing)} "
            "(pass flags, --preset paper, or --params file.json)"
        )
    elements = {k: v for k, v in elements.items() if k in required + tuple(optional)}

    if topology in ("ssf", "fvf") and variant not in ("I", "II"):
        raise UsageError(f"--type I|II is required for {topology}")
    try:
        return build(topology, variant if topology in ("ssf", "fvf") else None, **elements)
    except GmclabError as err:
        raise UsageError(str(err)) from err


def _grid_from_args(args) -> FrequencyGrid:
    try:
        return FrequencyGrid(
            f_start=_positive(args.f_start, "--f-start"),
            f_stop=_positive(args.f_stop, "--f-stop"),
            points=args.points,
            spacing=args.spacing,
        )
    except GmclabError as err:
        raise UsageError(str(err)) from err


def _add_topology_flags(sub, with_grid: bool = True) -> None:
    sub.add_argument("--topology", choices=TOPOLOGIES, default=None)
    sub.add_argument("--type", choices=("I", "II"), default=None,
                     help="variant for ssf/fvf")
    sub.add_argument("--preset", choices=("paper",), default=None,
                     help="use the published element values for the topology")
    sub.add_argument("--params", default=None,
                     help="JSON parameter record (topology, variant, elements)")
    for flag in _ELEMENT_FLAGS:
        sub.add_argument(f"--{flag}", default=None, metavar="VALUE",
                         help=argparse.SUPPRESS)
    if with_grid:
        sub.add_argument("--f-start", default="1")
        sub.add_argument("--f-stop", default="1M")
        sub.add_argument("--points", type=int, default=512)
        sub.add_argument("--spacing", choices=("log", "linear"), default="log")


def _cmd_response(args) -> int:
    bundle = _gather_bundle(args)
    grid = _grid_from_args(args)
    if args.engine == "closed":
        labels = sorted(bundle.closed_forms)
        probe = args.probe or next(
            (p for p in _PROBE_PREFERENCE if p in bundle.closed_forms), labels[0]
        )
        if probe not in bundle.closed_forms:
            raise UsageError(
                f"no closed form for probe {probe!r}; available: {', '.join(labels)}"
            )
        resp = sweep_tf(bundle.closed_forms[probe], grid)
    else:
        labels = sorted(bundle.netlist.probe_labels)
        probe = args.probe or next(
            (p for p in _PROBE_PREFERENCE if p in labels), labels[0]
        )
        if probe not in labels:
            raise UsageError(f"unknown probe {probe!r}; available: {', '.join(labels)}")
        resp = mna_response(bundle.netlist, probe, grid)
    _write_atomic(args.out, resp.to_csv())
    return 0


def _cmd_verify(args) -> int:
    tol = _positive(args.tol, "--tol")
    if args.topology in (None, "all"):
        keys = list(PAPER_PRESETS)
    elif args.topology in ("ssf", "fvf"):
        keys = [f"{args.topology}-i", f"{args.topology}-ii"]
    elif args.topology in PAPER_PRESETS:
        keys = [args.topology]
    elif args.topology in TOPOLOGIES:
        keys = [args.topology]
    else:
        raise UsageError(f"unknown topology {args.topology!r}")

    grid = _grid_from_args(args)
    worst = 0.0
    failures = 0
    for key in keys:
        bundle = paper_bundle(key)
        errs = {}
        for label, tf in bundle.closed_forms.items():
            closed = sweep_tf(tf, grid)
            oracle = mna_response(bundle.netlist, label, grid)
            errs[label] = compare(oracle, closed)
        label, err = max(errs.items(), key=lambda kv: kv[1])
        worst = max(worst, err)
        ok = err <= tol
        failures += 0 if ok else 1
        print(f"{key:10s} max_rel_err={err:.3e} (probe {label})  {'ok' if ok else 'EXCEEDED'}")
    print(f"{'PASS' if failures == 0 else 'FAIL'}: worst {worst:.3e} vs tolerance {tol:g}")
    return 0 if failures == 0 else 1


def _cmd_poles(args) -> int:
    bundle = _gather_bundle(args)
    primary = next(
        (p for p in _PROBE_PREFERENCE if p in bundle.closed_forms),
        sorted(bundle.closed_forms)[0],
    )
    tf = bundle.closed_forms[primary]
    lines = [
        f"topology: {bundle.name}" + (f" (type {bundle.params['variant']})" if bundle.params["variant"] else ""),
        f"probe: {primary}",
        f"omega0_rad_per_s: {bundle.omega0!r}",
        f"f0_hz: {bundle.f0!r}",
        f"q: {'' if bundle.q is None else repr(bundle.q)}",
    ]
    for i, pole in enumerate(tf_poles(tf)):
        lines.append(f"pole{i}: {pole.real!r} {'+' if pole.imag >= 0 else '-'} {abs(pole.imag)!r}j")
    if bundle.stability_warning:
        lines.append(f"warning: {bundle.stability_warning}")
    _write_atomic(args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_bank_design(args) -> int:
    try:
        spec = FilterBankSpec(
            channels=args.channels,
            f_lo_hz=_positive(args.f_lo, "--f-lo"),
            f_hi_hz=_positive(args.f_hi, "--f-hi"),
            q=_positive(args.q, "--q"),
            prototype=args.prototype,
            fs_hz=_positive(args.fs, "--fs") if args.fs else None,
            smooth_hz=_positive(args.smooth_hz, "--smooth-hz"),
            frame_rate_hz=_positive(args.frame_rate, "--frame-rate"),
            log_compress=args.log_compress,
            normalize_peak=args.normalize_peak,
        )
    except GmclabError as err:
        raise UsageError(str(err)) from err
    _write_atomic(args.out, spec.to_json())
    return 0


def _cmd_bank_run(args) -> int:
    with open(args.bank) as fh:
        spec = FilterBankSpec.from_json(fh.read())
    samples, fs = read_wav(args.wav)
    if spec.fs_hz is not None and float(spec.fs_hz) != float(fs):
        raise GmclabError(
            f"bank was designed for fs = {spec.fs_hz:g} Hz but {args.wav} has fs = {fs} Hz"
        )
    bank = build_discrete_bank(spec, float(fs))
    if args.raw:
        rows = filter_outputs(bank, samples)
        header = "time_s," + ",".join(f"ch{c:02d}" for c in range(len(bank)))
        lines = [header]
        for i in range(rows.shape[1]):
            t = i / float(fs)
            lines.append(f"{t!r}," + ",".join(repr(float(v)) for v in rows[:, i]))
        _write_atomic(args.out, "\n".join(lines) + "\n")
    else:
        features = run_bank(bank, samples, float(fs), spec.envelope())
        _write_atomic(args.out, features.to_csv())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gmclab",
        description="gm-C filter topology sweeps, closed-form vs nodal-analysis "
                    "verification, and band-pass filter-bank feature extraction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("response", help="sweep one probe of a topology to CSV")
    _add_topology_flags(p)
    p.add_argument("--probe", default=None)
    p.add_argument("--engine", choices=("closed", "mna"), default="closed")
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_response)

    p = sub.add_parser("verify", help="closed form vs nodal-analysis oracle")
    p.add_argument("--topology", default="all")
    p.add_argument("--tol", default="1e-9")
    p.add_argument("--f-start", default="1")
    p.add_argument("--f-stop", default="1M")
    p.add_argument("--points", type=int, default=512)
    p.add_argument("--spacing", choices=("log", "linear"), default="log")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("poles", help="pole locations, f0, and Q of a topology")
    _add_topology_flags(p, with_grid=False)
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_poles)

    p = sub.add_parser("bank-design", help="write a filter-bank spec JSON")
    p.add_argument("--channels", type=int, default=16)
    p.add_argument("--f-lo", default="100")
    p.add_argument("--f-hi", default="8k")
    p.add_argument("--q", default="2")
    p.add_argument("--prototype", choices=("equal_pole_bpf", "two_pole_bpf"),
                   default="equal_pole_bpf")
    p.add_argument("--fs", default=None)
    p.add_argument("--smooth-hz", default="25")
    p.add_argument("--frame-rate", default="100")
    p.add_argument("--log-compress", action="store_true")
    p.add_argument("--normalize-peak", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_bank_design)

    p = sub.add_parser("bank-run", help="run audio through a designed bank")
    p.add_argument("--bank", required=True)
    p.add_argument("--wav", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--raw", action="store_true",
                   help="emit raw per-channel filter output instead of envelopes")
    p.set_defaults(func=_cmd_bank_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (GmclabError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
