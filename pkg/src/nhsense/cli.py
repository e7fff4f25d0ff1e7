"""Command-line driver: sweep, verify, dilate.

Exit codes: 0 success, 1 invariant/hierarchy failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
import warnings

import numpy as np

from . import dilation
from .errors import AmplificationOverflow, InvalidInput, InvalidParam, NhsenseError
from .fisher import check_hierarchy, fisher_breakdown
from .models import MODEL_FACTORIES, make_model
from .sweep import SweepConfig, dump_records, run_sweep, write_records

MODEL_PARAM_KEYS = {
    "lambda": "lam",
    "omega_ep": "omega_ep",
    "omega_ccw": "omega_ccw",
    "r": "r",
    "phi": "phi",
    "v": "v",
    "g": "g",
    "k_h": "k_h",
    "k_v": "k_v",
}


def parse_config_file(path: str) -> dict:
    """Flat key-value config: 'key = value' lines, '#' comments."""
    out: dict = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidInput(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key] = value
    return out


def parse_theta_range(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise InvalidInput(f"theta range must be MIN:MAX:COUNT, got {text!r}")
    return float(parts[0]), float(parts[1]), int(parts[2])


def parse_times(text: str) -> tuple:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _build_sweep_config(args) -> SweepConfig:
    settings: dict = {}
    if args.config:
        settings.update(parse_config_file(args.config))
    # command-line flags override the file
    overrides = {
        "model": args.model,
        "theta": args.theta,
        "t": args.t,
        "out": args.out,
        "format": args.format,
        "fd_step": args.fd_step,
        "steps_per_unit_time": args.steps_per_unit_time,
        "eta0_mode": args.eta0_mode,
    }
    for key, mapped in MODEL_PARAM_KEYS.items():
        flag = getattr(args, f"param_{mapped}", None)
        if flag is not None:
            settings[key] = str(flag)
    for key, value in overrides.items():
        if value is not None:
            settings[key] = str(value)

    if "model" not in settings:
        raise InvalidInput("no model given (flag --model or config key 'model')")
    if "theta" not in settings:
        raise InvalidInput("no theta range given (MIN:MAX:COUNT)")
    if "t" not in settings:
        raise InvalidInput("no evolution times given (comma list)")

    fixed = {
        MODEL_PARAM_KEYS[key]: float(settings[key])
        for key in MODEL_PARAM_KEYS
        if key in settings
    }
    tmin, tmax, count = parse_theta_range(settings["theta"])
    return SweepConfig(
        model=settings["model"],
        theta_min=tmin,
        theta_max=tmax,
        theta_count=count,
        times=parse_times(settings["t"]),
        fixed_params=fixed,
        fd_step=float(settings.get("fd_step", 1e-5)),
        steps_per_unit_time=int(settings.get("steps_per_unit_time", 2000)),
        eta0_mode=settings.get("eta0_mode", "auto_rescale"),
        output=settings.get("out"),
        fmt=settings.get("format", "csv"),
    )


def cmd_sweep(args) -> int:
    config = _build_sweep_config(args)
    jobs = args.jobs if args.jobs is not None else (os.cpu_count() or 1)
    records = run_sweep(config, jobs=jobs)
    if config.output:
        write_records(records, config.output, config.fmt)
    else:
        dump_records(records, sys.stdout, config.fmt)
    status = 0
    for rec in records:
        if rec.warning is not None:
            print(f"warning: theta={rec.theta:g} t={rec.t:g}: {rec.warning}",
                  file=sys.stderr)
            if args.strict:
                status = 1
        elif not rec.hierarchy_ok:
            status = 1
    return status


# per-model (theta, t) sampling windows for randomized verification
VERIFY_RANGES = {
    "pseudo_hermitian": ((0.05, 1.5), (0.5, 3.0)),
    "ep_gyro": ((1.06, 2.0), (0.5, 3.0)),
    "pt_symmetric": ((1.06, 2.0), (0.5, 3.0)),
    "loss_loss": ((0.45, 2.0), (0.5, 3.0)),
}


def _emit(lines, ok: bool, label: str, detail: str = "") -> bool:
    lines.append(f"{'PASS' if ok else 'FAIL'} {label}" + (f" {detail}" if detail else ""))
    return ok


def cmd_verify(args) -> int:
    names = list(MODEL_FACTORIES) if args.model in (None, "all") else [args.model]
    for name in names:
        if name not in MODEL_FACTORIES:
            raise InvalidParam(f"unknown model {name!r}")
    rng = np.random.default_rng(args.seed)
    lines: list[str] = []
    all_ok = True

    for name in names:
        model = make_model(name)
        (th_lo, th_hi), (t_lo, t_hi) = VERIFY_RANGES[name]
        for i in range(args.points):
            theta = float(rng.uniform(th_lo, th_hi))
            t = float(rng.uniform(t_lo, t_hi))
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    report = dilation.verify_dilation(model, theta, t)
            except AmplificationOverflow as exc:
                lines.append(
                    f"WARN {name} dilation theta={theta:.4g} t={t:.4g} "
                    f"AmplificationOverflow: {exc}"
                )
                continue
            ok = report.passed
            all_ok &= _emit(
                lines, ok, f"{name} dilation theta={theta:.4g} t={t:.4g}",
                f"fidelity={report.detected_fidelity:.12f} "
                f"p_d={report.p_d:.4g} "
                f"failed={[k for k, v in report.checks.items() if not v]}",
            )

        # Fisher hierarchy on a small deterministic subset (costly per point)
        for frac in (0.3, 0.7):
            theta = th_lo + frac * (th_hi - th_lo)
            t = 2.0
            b = fisher_breakdown(model, theta, t, steps_per_unit_time=500)
            if args.corrupt:
                b = dataclasses.replace(b, q_d=2.0 * b.q_d)
            rep = check_hierarchy(b)
            all_ok &= _emit(
                lines, rep.passed, f"{name} hierarchy theta={theta:.4g} t={t:.4g}",
                f"violations={list(rep.failures)}" if rep.failures else
                f"margins=({rep.margin_eff_le_tot:.3g},{rep.margin_tot_le_joint:.3g})",
            )

        if name == "pseudo_hermitian":
            theta, t = 0.785398, 2.0
            exact = model.analytic_p_d(theta, t)
            printed = model.printed_p_d(theta, t)
            lines.append(
                "NOTE pseudo_hermitian documented discrepancy: exact oracle "
                f"P_d={exact:.6f} differs from the published closed form "
                f"P_d={printed:.6f} at theta={theta:g}, t={t:g} "
                "(second order in (1-lambda^2) sin^2; exact value is used)"
            )

    for line in lines:
        print(line)
    print(f"RESULT {'PASS' if all_ok else 'FAIL'}")
    return 0 if all_ok else 1


def _print_matrix(label: str, mat: np.ndarray) -> None:
    print(f"{label} =")
    for row in np.atleast_2d(mat):
        print("  [" + "  ".join(f"{z.real:+.6f}{z.imag:+.6f}j" for z in row) + "]")


def cmd_dilate(args) -> int:
    params = {
        MODEL_PARAM_KEYS[key]: getattr(args, f"param_{MODEL_PARAM_KEYS[key]}")
        for key in MODEL_PARAM_KEYS
        if getattr(args, f"param_{MODEL_PARAM_KEYS[key]}", None) is not None
    }
    model = make_model(args.model, **params)
    bundle = dilation.build_bundle(model, args.theta, args.t)
    print(f"model = {model.name}  theta = {args.theta:g}  t = {args.t:g}")
    print(f"path = {bundle.path}")
    print(f"rescale_factor = {bundle.rescale_factor:.6g}")
    _print_matrix("eta(0)", bundle.eta0)
    _print_matrix("m(0)", bundle.m_at(0))
    if bundle.path == dilation.PATH_SHORTCUT:
        _print_matrix("H_SE", bundle.h_se)
    else:
        _print_matrix("m(t)", bundle.m_at(-1))
        _print_matrix("H_SE(t/2)", bundle.h_se[len(bundle.h_se) // 2])
    eta_stack = bundle.eta_t if bundle.eta_t.ndim == 3 else bundle.eta_t[None]
    eta_min = float(np.linalg.eigvalsh(eta_stack - np.eye(2)).min())
    h_se_stack = bundle.h_se if bundle.h_se.ndim == 3 else bundle.h_se[None]
    h_res = float(np.max(np.abs(h_se_stack - h_se_stack.conj().swapaxes(-1, -2))))
    print(f"min eigenvalue of eta(t) - I over grid = {eta_min:.3e}")
    print(f"H_SE hermiticity residual = {h_res:.3e}")
    print(f"raw block construction drift = {bundle.drift:.3e}")
    return 0


def _add_model_param_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda", dest="param_lam", type=float, default=None)
    parser.add_argument("--omega-ep", dest="param_omega_ep", type=float, default=None)
    parser.add_argument("--omega-ccw", dest="param_omega_ccw", type=float, default=None)
    parser.add_argument("--r", dest="param_r", type=float, default=None)
    parser.add_argument("--phi", dest="param_phi", type=float, default=None)
    parser.add_argument("--v", dest="param_v", type=float, default=None)
    parser.add_argument("--g", dest="param_g", type=float, default=None)
    parser.add_argument("--k-h", dest="param_k_h", type=float, default=None)
    parser.add_argument("--k-v", dest="param_k_v", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nhsense",
        description="Non-Hermitian sensor simulation and Fisher-information "
        "decomposition via Naimark dilation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="grid sweep emitting CSV/jsonl records")
    p_sweep.add_argument("--config", default=None)
    p_sweep.add_argument("--model", default=None, help="model registry name")
    p_sweep.add_argument("--theta", default=None, help="MIN:MAX:COUNT")
    p_sweep.add_argument("--t", default=None, help="comma list of times")
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--format", default=None, choices=["csv", "jsonl"])
    p_sweep.add_argument("--fd-step", dest="fd_step", type=float, default=None)
    p_sweep.add_argument(
        "--steps-per-unit-time", dest="steps_per_unit_time", type=int, default=None
    )
    p_sweep.add_argument("--eta0-mode", dest="eta0_mode", default=None)
    p_sweep.add_argument("--jobs", type=int, default=None)
    p_sweep.add_argument("--strict", action="store_true")
    _add_model_param_flags(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="randomized invariant suite")
    p_verify.add_argument("--model", default="all")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--points", type=int, default=8)
    p_verify.add_argument("--corrupt", action="store_true",
                          help="negative control: inflate q_d before checking")
    p_verify.set_defaults(func=cmd_verify)

    p_dilate = sub.add_parser("dilate", help="print a dilation bundle summary")
    p_dilate.add_argument("--model", required=True)
    p_dilate.add_argument("--theta", type=float, required=True)
    p_dilate.add_argument("--t", type=float, required=True)
    _add_model_param_flags(p_dilate)
    p_dilate.set_defaults(func=cmd_dilate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidInput, InvalidParam, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NhsenseError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
