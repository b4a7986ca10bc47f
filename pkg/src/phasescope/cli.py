"""Batch command line driving the analysis pipelines.

Each invocation runs exactly one pipeline and writes machine-readable
artifacts: PSF1 fields, JSON reports and manifests, CSV exports.  Exit
codes: 0 success (verdict pass where applicable), 2 a checked estimate
failed, 3 bad input (malformed JSON, schema violations, unreadable
files), 4 numerical failure (non-finite values).

Signal, window, symbol, subspace and operator inputs are JSON described
(see the io module); a flag value starting with '@' reads the JSON from
that file.  Every manifest echoes the full defaults table so stored
artifacts pin the configuration that produced them.  PHASESCOPE_THREADS
caps FFT workers; the --threads flag wins over the environment.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import io as pio
from .conormal import construct, membership_test
from .defaults import DEFAULTS, manifest_block
from .exceptions import InvalidFormat, PhasescopeError
from .fbi import PhaseSpaceField, invert, transform
from .grid import AxisSpec, GridFunction, GridSpec, set_fft_workers
from .metaplectic import apply_signal
from .signals import Pullback, Sampled, StandardGaussian, has_point_mass, sample
from .sobolev import continuity_ratio, qs_norm
from .symclass import classical_defect, estimate_order, transform_side_check
from .wavefront import transport_check, wf_estimate
from .weyl import apply_kernel, kernel_conormal_check, kernel_from_symbol

__all__ = ["main"]

EXIT_PASS = 0
EXIT_FAIL = 2
EXIT_INPUT = 3
EXIT_NUMERIC = 4


def _json_flag(text: str, flag: str):
    if text.startswith("@"):
        try:
            with open(text[1:], encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise InvalidFormat(f"{flag}: cannot read {text[1:]}: {e}") from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidFormat(
            f"{flag}: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}"
        ) from e


def _desc_dim(desc) -> int | None:
    """Best-effort base dimension of a signal description."""
    if not isinstance(desc, dict):
        return None
    kind = desc.get("type")
    if kind in ("point_mass", "gaussian_packet") and "x0" in desc:
        return len(desc["x0"])
    if kind == "constant" and "dim" in desc:
        return int(desc["dim"])
    if kind == "chirp" and "B" in desc:
        return len(desc["B"])
    if kind == "tensor_product" and "factors" in desc:
        parts = [_desc_dim(f) for f in desc["factors"]]
        return None if any(p is None for p in parts) else sum(parts)
    if kind == "linear_combination" and desc.get("terms"):
        return _desc_dim(desc["terms"][0].get("signal"))
    if kind == "sampled" and "path" in desc:
        f, _ = pio.load_field(desc["path"])
        return f.spec.dim
    return None


def _grid_key(dim: int) -> dict:
    if dim == 1:
        return DEFAULTS["grid_d1"]
    if dim == 2:
        return DEFAULTS["grid_d2"]
    raise InvalidFormat("default grids cover base dimensions 1 and 2; pass --grid-n")


def _signal_grid(args, dim: int) -> GridSpec:
    base = None if args.grid_n and args.grid_half else _grid_key(dim)
    n = args.grid_n or base["n"]
    half = args.grid_half or base["half_width"]
    return GridSpec.regular(dim, n, half)


def _symbol_grid(args) -> GridSpec:
    # class analysis reads the symbol as a plain function on phase space
    n = args.grid_n or DEFAULTS["grid_d2"]["n"]
    half = args.grid_half or DEFAULTS["grid_d2"]["half_width"]
    return GridSpec.regular(2 * args.dim, n, half)


def _quant_grid(args) -> GridSpec:
    # quantization needs xi axes that are the duals of the x axes
    d = args.dim
    n = args.grid_n or DEFAULTS["grid_kernel"]["n"]
    half = args.grid_half or DEFAULTS["grid_kernel"]["half_width"]
    xs = tuple(AxisSpec(n, half) for _ in range(d))
    return GridSpec(xs + tuple(a.dual() for a in xs))


def _load_signal(args, spec: GridSpec | None):
    return pio.signal_from_json(_json_flag(args.signal, "--signal"), spec)


def _load_window(args, spec: GridSpec):
    if getattr(args, "window", None) is None:
        return StandardGaussian(spec.dim)
    return pio.window_from_json(_json_flag(args.window, "--window"), spec)


def _signal_with_grid(args):
    desc = _json_flag(args.signal, "--signal")
    dim = _desc_dim(desc) or args.dim
    spec = _signal_grid(args, dim)
    return pio.signal_from_json(desc, spec), spec, desc


def _load_symbol_arg(args, quant: bool = False):
    desc = _json_flag(args.symbol, "--symbol")
    if isinstance(desc, dict) and "path" in desc:
        return pio.symbol_from_json(desc), desc
    spec = _quant_grid(args) if quant else _symbol_grid(args)
    return pio.symbol_from_json(desc, spec), desc


def _out(args, name: str) -> str:
    os.makedirs(args.out_dir, exist_ok=True)
    return os.path.join(args.out_dir, name)


# --- pipelines -------------------------------------------------------------


def cmd_transform(args):
    u, spec, desc = _signal_with_grid(args)
    g = _load_window(args, spec)
    F = transform(u, g, spec)
    path = _out(args, args.out)
    pio.save_field(
        path,
        GridFunction(F.spec, F.values),
        role="phase_space_field",
        window=None if args.window is None else _json_flag(args.window, "--window"),
        signal=desc,
    )
    if args.csv:
        pio.field_to_csv(path + ".csv", GridFunction(F.spec, F.values))
    return EXIT_PASS, {"field": path, "norm": F.norm()}


def cmd_invert(args):
    f, _ = pio.load_field(args.field)
    if f.spec.dim % 2 != 0:
        raise InvalidFormat("a phase-space field must have even rank")
    F = PhaseSpaceField(f.spec, f.spec.dim // 2, f.values)
    g = _load_window(args, F.x_spec)
    h = None
    if args.second_window is not None:
        h = pio.window_from_json(_json_flag(args.second_window, "--second-window"), F.x_spec)
    rec = invert(F, g, h)
    path = _out(args, args.out)
    pio.save_field(path, rec, role="signal")
    return EXIT_PASS, {"signal": path, "norm": float(np.linalg.norm(rec.values))}


def cmd_metaplectic(args):
    u, spec, _ = _signal_with_grid(args)
    op = pio.metaplectic_from_json(_json_flag(args.op, "--op"))
    v = apply_signal(op, u, spec)
    results = {"signal": pio.signal_to_json(v)}
    if isinstance(v, Sampled):
        path = _out(args, args.out)
        pio.save_field(path, v.data, role="signal", signal=results["signal"])
        results["field"] = path
    elif not (has_point_mass(v) or isinstance(v, Pullback)):
        path = _out(args, args.out)
        pio.save_field(path, sample(v, spec), role="signal", signal=results["signal"])
        results["field"] = path
    return EXIT_PASS, results


def cmd_symbol_check(args):
    a, _ = _load_symbol_arg(args)
    g = None if args.window is None else pio.window_from_json(
        _json_flag(args.window, "--window"), a.spec
    )
    rep = transform_side_check(
        a, g, order=args.order, rho=args.rho, alpha_max=args.alpha_max, decay=args.N
    )
    results = {"report": pio.jsonable(rep)}
    verdict = rep.verdict
    if args.classical:
        crep = classical_defect(a, order=args.order)
        results["classical"] = pio.jsonable(crep)
        verdict = verdict and crep.verdict
    return (EXIT_PASS if verdict else EXIT_FAIL), results


def cmd_symbol_order(args):
    a, _ = _load_symbol_arg(args)
    est = estimate_order(a)
    return EXIT_PASS, {"estimate": pio.jsonable(est), "declared": a.m}


def cmd_classical_check(args):
    a, _ = _load_symbol_arg(args)
    rep = classical_defect(a, order=args.order, depth=args.depth)
    return (EXIT_PASS if rep.verdict else EXIT_FAIL), {"report": pio.jsonable(rep)}


def cmd_weyl_kernel(args):
    a, _ = _load_symbol_arg(args, quant=True)
    K = kernel_from_symbol(a)
    path = _out(args, args.out)
    pio.save_field(path, GridFunction(K.spec, K.values), role="kernel")
    return EXIT_PASS, {"kernel": path, "rank": K.spec.dim}


def _load_kernel_arg(args):
    if args.kernel is not None:
        return pio.load_kernel(args.kernel)
    if args.symbol is None:
        raise InvalidFormat("pass --kernel or --symbol")
    a, _ = _load_symbol_arg(args, quant=True)
    return kernel_from_symbol(a)


def cmd_weyl_apply(args):
    K = _load_kernel_arg(args)
    u = pio.signal_from_json(_json_flag(args.signal, "--signal"), K.domain_spec)
    out = apply_kernel(K, u)
    path = _out(args, args.out)
    pio.save_field(path, out, role="signal")
    return EXIT_PASS, {"signal": path, "norm": float(np.linalg.norm(out.values))}


def cmd_kernel_check(args):
    K = _load_kernel_arg(args)
    g = None if args.window is None else pio.window_from_json(
        _json_flag(args.window, "--window"), K.spec
    )
    rep = kernel_conormal_check(
        K,
        g,
        order=args.order,
        rho=args.rho,
        alpha_max=args.alpha,
        beta_max=args.beta,
        decay=args.N,
    )
    return (EXIT_PASS if rep.verdict else EXIT_FAIL), {"report": pio.jsonable(rep)}


def cmd_qs_norm(args):
    u, spec, _ = _signal_with_grid(args)
    g = _load_window(args, spec)
    value = qs_norm(u, args.s, g, spec)
    if not np.isfinite(value):
        raise FloatingPointError("the weighted norm is not finite")
    return EXIT_PASS, {"s": args.s, "norm": value}


def cmd_continuity(args):
    a, _ = _load_symbol_arg(args, quant=True)
    rep = continuity_ratio(a, args.s)
    if not np.isfinite(rep.max_ratio):
        raise FloatingPointError("the continuity ratio is not finite")
    return EXIT_PASS, {"report": pio.jsonable(rep)}


def cmd_conormal_make(args):
    desc = _json_flag(args.symbol, "--symbol")
    dim = args.dim
    spec = GridSpec.regular(
        dim,
        args.grid_n or DEFAULTS["grid_kernel"]["n"],
        args.grid_half or DEFAULTS["grid_kernel"]["half_width"],
    )
    a = pio.symbol_from_json(desc, spec)
    M1 = np.asarray(_json_flag(args.M1, "--M1"), dtype=np.float64)
    M2 = np.asarray(_json_flag(args.M2, "--M2"), dtype=np.float64)
    u, Y = construct(a, M1, M2)
    results = {"subspace": pio.jsonable(Y), "signal": pio.signal_to_json(u)}
    if isinstance(u, Sampled):
        path = _out(args, args.out)
        pio.save_field(path, u.data, role="signal", signal=results["signal"])
        results["field"] = path
    return EXIT_PASS, results


def cmd_conormal_test(args):
    u, spec, _ = _signal_with_grid(args)
    Y = pio.subspace_from_json(_json_flag(args.subspace, "--subspace"))
    g = None
    if args.window is not None:
        g = pio.window_from_json(_json_flag(args.window, "--window"), spec)
    rep = membership_test(
        u, Y, m=args.order, rho=args.rho, g=g, k_max=args.kmax, decay=args.N, spec=spec
    )
    return (EXIT_PASS if rep.verdict else EXIT_FAIL), {"report": pio.jsonable(rep)}


def cmd_wavefront(args):
    u, spec, _ = _signal_with_grid(args)
    g = _load_window(args, spec)
    r_min = r_max = None
    if args.radii is not None:
        parts = args.radii.split(",")
        if len(parts) != 2:
            raise InvalidFormat("--radii expects 'r_min,r_max'")
        r_min, r_max = (float(p) for p in parts)
    rep = wf_estimate(
        u,
        g,
        spec,
        directions=args.directions,
        aperture_deg=args.aperture,
        threshold=args.threshold,
        r_min=r_min,
        r_max=r_max,
    )
    base = _out(args, args.out)
    pio.save_json(base + ".json", rep)
    pio.wavefront_to_csv(base + ".csv", rep)
    return EXIT_PASS, {
        "report": base + ".json",
        "csv": base + ".csv",
        "in_count": rep.count_in,
    }


def cmd_transport_check(args):
    u, spec, _ = _signal_with_grid(args)
    g = _load_window(args, spec)
    op = pio.metaplectic_from_json(_json_flag(args.op, "--op"))
    ok = transport_check(u, op, g, spec)
    return (EXIT_PASS if ok else EXIT_FAIL), {"pass": bool(ok)}


# --- parser ----------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="phasescope",
        description="batch pipelines for numerical phase-space analysis",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=".", help="directory for artifacts")
    common.add_argument("--threads", type=int, default=None, help="FFT worker cap")
    common.add_argument("--seed", type=int, default=DEFAULTS["seed"], help="echoed into the manifest")
    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--dim", type=int, default=1, help="base dimension")
    grid.add_argument("--grid-n", type=int, default=None, help="nodes per axis")
    grid.add_argument("--grid-half", type=float, default=None, help="axis half width")
    winp = argparse.ArgumentParser(add_help=False)
    winp.add_argument("--window", default=None, help="window JSON (default standard Gaussian)")

    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, parents, flags):
        sp = sub.add_parser(name, parents=parents, help=help_text, description=help_text)
        for args_, kwargs in flags:
            sp.add_argument(*args_, **kwargs)
        sp.set_defaults(func=func)
        return sp

    add(
        "transform",
        cmd_transform,
        "windowed phase-space transform of a signal",
        [common, grid, winp],
        [
            (("--signal",), {"required": True, "help": "signal JSON"}),
            (("--out",), {"default": "field.psf1"}),
            (("--csv",), {"action": "store_true", "help": "also write node CSV"}),
        ],
    )
    add(
        "invert",
        cmd_invert,
        "reconstruct a signal from a phase-space field",
        [common, winp],
        [
            (("--field",), {"required": True, "help": "PSF1 phase-space field"}),
            (("--second-window",), {"default": None, "help": "synthesis window JSON"}),
            (("--out",), {"default": "signal.psf1"}),
        ],
    )
    add(
        "metaplectic",
        cmd_metaplectic,
        "apply a metaplectic operator to a signal",
        [common, grid],
        [
            (("--signal",), {"required": True}),
            (("--op",), {"required": True, "help": "operator JSON or ordered array"}),
            (("--out",), {"default": "image.psf1"}),
        ],
    )
    add(
        "symbol-check",
        cmd_symbol_check,
        "test a symbol against its declared growth class",
        [common, grid, winp],
        [
            (("--symbol",), {"required": True, "help": "symbol JSON"}),
            (("--order",), {"type": float, "default": None, "help": "declared order"}),
            (("--rho",), {"type": float, "default": None}),
            (("--alpha-max",), {"type": int, "default": 2}),
            (("--N",), {"type": int, "default": 4, "help": "transverse decay exponent"}),
            (("--classical",), {"action": "store_true", "help": "also test polyhomogeneity"}),
        ],
    )
    add(
        "symbol-order",
        cmd_symbol_order,
        "estimate a symbol's growth order from shell suprema",
        [common, grid],
        [(("--symbol",), {"required": True})],
    )
    add(
        "classical-check",
        cmd_classical_check,
        "test polyhomogeneity via radial defect orders",
        [common, grid],
        [
            (("--symbol",), {"required": True}),
            (("--order",), {"type": float, "default": None}),
            (("--depth",), {"type": int, "default": 1}),
        ],
    )
    add(
        "weyl-kernel",
        cmd_weyl_kernel,
        "build the symmetric-quantization kernel of a symbol",
        [common, grid],
        [
            (("--symbol",), {"required": True}),
            (("--out",), {"default": "kernel.psf1"}),
        ],
    )
    add(
        "weyl-apply",
        cmd_weyl_apply,
        "apply a quantized symbol to a signal",
        [common, grid],
        [
            (("--signal",), {"required": True}),
            (("--symbol",), {"default": None}),
            (("--kernel",), {"default": None, "help": "PSF1 kernel path"}),
            (("--out",), {"default": "applied.psf1"}),
        ],
    )
    add(
        "kernel-check",
        cmd_kernel_check,
        "test a kernel's diagonal conormal envelope",
        [common, grid, winp],
        [
            (("--symbol",), {"default": None}),
            (("--kernel",), {"default": None}),
            (("--order",), {"type": float, "default": 0.0}),
            (("--rho",), {"type": float, "default": 1.0}),
            (("--alpha",), {"type": int, "default": 1}),
            (("--beta",), {"type": int, "default": 1}),
            (("--N",), {"type": int, "default": None}),
        ],
    )
    add(
        "qs-norm",
        cmd_qs_norm,
        "weighted phase-space norm of a signal",
        [common, grid, winp],
        [
            (("--signal",), {"required": True}),
            (("--s",), {"type": float, "required": True, "help": "weight exponent"}),
        ],
    )
    add(
        "continuity",
        cmd_continuity,
        "norm ratios of a quantized symbol between weighted spaces",
        [common, grid],
        [
            (("--symbol",), {"required": True}),
            (("--s",), {"type": float, "default": 0.0}),
        ],
    )
    add(
        "conormal-make",
        cmd_conormal_make,
        "synthesize a distribution conormal to a subspace",
        [common, grid],
        [
            (("--symbol",), {"required": True}),
            (("--M1",), {"required": True, "help": "JSON matrix, columns span Y"}),
            (("--M2",), {"required": True, "help": "JSON matrix, transversal columns"}),
            (("--out",), {"default": "conormal.psf1"}),
        ],
    )
    add(
        "conormal-test",
        cmd_conormal_test,
        "two-block envelope test of conormal membership",
        [common, grid, winp],
        [
            (("--signal",), {"required": True}),
            (("--subspace",), {"required": True, "help": 'JSON {"basis": [[...]]}'}),
            (("--order",), {"type": float, "default": 0.0}),
            (("--rho",), {"type": float, "default": 1.0}),
            (("--kmax",), {"type": int, "default": None}),
            (("--N",), {"type": int, "default": None}),
        ],
    )
    add(
        "wavefront",
        cmd_wavefront,
        "classify phase-space directions by cone decay",
        [common, grid, winp],
        [
            (("--signal",), {"required": True}),
            (("--aperture",), {"type": float, "default": None, "help": "cone aperture, degrees"}),
            (("--threshold",), {"type": float, "default": None, "help": "decay exponent cut"}),
            (("--radii",), {"default": None, "help": "'r_min,r_max'"}),
            (("--directions",), {"type": int, "default": None}),
            (("--out",), {"default": "wavefront"}),
        ],
    )
    add(
        "transport-check",
        cmd_transport_check,
        "compare wave front transport against the phase-space point map",
        [common, grid, winp],
        [
            (("--signal",), {"required": True}),
            (("--op",), {"required": True}),
        ],
    )
    return p


def _set_threads(args) -> int:
    n = args.threads
    if n is None:
        env = os.environ.get("PHASESCOPE_THREADS")
        if env is not None:
            try:
                n = int(env)
            except ValueError as e:
                raise InvalidFormat(f"PHASESCOPE_THREADS={env!r} is not an integer") from e
    if n is not None:
        if n < 1:
            raise InvalidFormat("thread count must be positive")
        set_fft_workers(n)
    return n or 1


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        threads = _set_threads(args)
        code, results = args.func(args)
    except InvalidFormat as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (FloatingPointError, OverflowError, ZeroDivisionError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except PhasescopeError as e:
        # constructors flag non-finite values; everything else is bad input
        numeric = "finite" in str(e) or "NaN" in str(e)
        print(f"{'numerical failure' if numeric else 'input error'}: {e}", file=sys.stderr)
        return EXIT_NUMERIC if numeric else EXIT_INPUT
    config = {k: v for k, v in vars(args).items() if k != "func"}
    manifest = {
        "command": args.command,
        "config": config,
        "defaults": manifest_block(),
        "threads": threads,
        "created": pio.creation_time(),
        "results": results,
    }
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, args.command.replace("-", "_") + "_manifest.json")
    pio.save_json(path, manifest)
    status = {EXIT_PASS: "ok", EXIT_FAIL: "verdict fail"}[code]
    print(f"{args.command}: {status} ({path})")
    return code


if __name__ == "__main__":
    sys.exit(main())
