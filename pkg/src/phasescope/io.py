"""Field and report serialization: PSF1 binary fields, JSON, CSV.

The PSF1 layout is the magic bytes b"PSF1", a little-endian u32 rank,
then one (u32 node count, f64 half width) pair per axis, then the
complex128 little-endian payload in C row order.  Every saved field gets
a JSON sidecar <path>.json recording role, window, signal and creation
time; creation time honors SOURCE_DATE_EPOCH (default 0) so repeated
runs produce byte-identical artifacts.

Signals, windows, metaplectic elements, symbols and subspaces have a
JSON description format built from their constructor vocabulary, e.g.
{"type": "gaussian_packet", "x0": [0.0], "xi0": [2.0], "sigma": 1.0,
"B": null}.  Descriptions that need a grid to materialize (sampled data,
chirps, moment windows) take the grid from the caller.
"""

from __future__ import annotations

import dataclasses
import json
import os
import struct

import numpy as np

from .exceptions import InvalidFormat
from .grid import AxisSpec, GridFunction, GridSpec
from .metaplectic import (
    Composition,
    CoordChange,
    FourierRot,
    MetaplecticElement,
    Shear,
    Shift,
)
from .signals import (
    Constant,
    GaussianPacket,
    LinearCombination,
    PointMass,
    Pullback,
    Sampled,
    SampledWindow,
    Signal,
    StandardGaussian,
    TensorProduct,
    Window,
    window_chirp,
    window_moment,
    window_pullback,
)
from .subspaces import SubspaceSpec, make_subspace
from .symclass import SymbolGrid, make_symbol
from .wavefront import WaveFrontReport
from .weyl import KernelGrid

__all__ = [
    "save_field",
    "load_field",
    "load_kernel",
    "load_symbol",
    "field_to_csv",
    "wavefront_to_csv",
    "jsonable",
    "save_json",
    "signal_to_json",
    "signal_from_json",
    "window_to_json",
    "window_from_json",
    "metaplectic_from_json",
    "subspace_from_json",
    "symbol_from_json",
    "creation_time",
]

_MAGIC = b"PSF1"
_MAX_RANK = 8


def creation_time() -> int:
    """Sidecar timestamp; pinned by SOURCE_DATE_EPOCH for reproducibility."""
    try:
        return int(os.environ.get("SOURCE_DATE_EPOCH", "0"))
    except ValueError:
        return 0


def _sidecar(path: str) -> str:
    return str(path) + ".json"


def save_field(
    path: str,
    f: GridFunction,
    role: str = "field",
    window=None,
    signal=None,
) -> None:
    """Write a PSF1 field plus its JSON sidecar."""
    spec = f.spec
    head = [struct.pack("<4sI", _MAGIC, spec.dim)]
    for ax in spec.axes:
        head.append(struct.pack("<Id", ax.n, ax.half_width))
    payload = np.ascontiguousarray(f.values, dtype="<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(b"".join(head))
        fh.write(payload)
    meta = {
        "role": role,
        "window": window,
        "signal": signal,
        "created": creation_time(),
    }
    save_json(_sidecar(path), meta)


def load_field(path: str) -> tuple[GridFunction, dict | None]:
    """Read a PSF1 field; returns the grid function and its sidecar."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 8 or raw[:4] != _MAGIC:
        raise InvalidFormat(f"{path}: not a PSF1 field")
    (rank,) = struct.unpack_from("<I", raw, 4)
    if not 1 <= rank <= _MAX_RANK:
        raise InvalidFormat(f"{path}: rank {rank} outside 1..{_MAX_RANK}")
    off = 8
    axes = []
    for _ in range(rank):
        if off + 12 > len(raw):
            raise InvalidFormat(f"{path}: truncated axis table")
        n, half = struct.unpack_from("<Id", raw, off)
        off += 12
        axes.append(AxisSpec(int(n), float(half)))
    spec = GridSpec(tuple(axes))
    count = int(np.prod(spec.shape))
    if len(raw) - off != 16 * count:
        raise InvalidFormat(
            f"{path}: payload holds {(len(raw) - off) // 16} values, grid needs {count}"
        )
    values = np.frombuffer(raw, dtype="<c16", count=count, offset=off)
    values = values.astype(np.complex128).reshape(spec.shape)
    side = None
    if os.path.exists(_sidecar(path)):
        with open(_sidecar(path), encoding="utf-8") as fh:
            side = json.load(fh)
    return GridFunction(spec, values), side


def load_kernel(path: str) -> KernelGrid:
    f, _ = load_field(path)
    return KernelGrid(f.spec, f.values)


def load_symbol(path: str, order: float, rho: float = 1.0) -> SymbolGrid:
    f, _ = load_field(path)
    return SymbolGrid(f.spec, f.values, float(order), float(rho))


def field_to_csv(path: str, f: GridFunction) -> None:
    """One row per node: x_1 ... x_d, re, im, in C node order."""
    d = f.spec.dim
    pts = f.spec.points()
    vals = f.values.ravel()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(f"x{i + 1}" for i in range(d)) + ",re,im\n")
        for p, v in zip(pts, vals):
            coords = ",".join(f"{c:.17g}" for c in p)
            fh.write(f"{coords},{v.real:.17g},{v.imag:.17g}\n")


def wavefront_to_csv(path: str, report: WaveFrontReport) -> None:
    """One row per sampled direction: components, exponent, ridge, in."""
    k = report.directions.shape[1]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(f"w{i + 1}" for i in range(k)) + ",exponent,ridge_ratio,in\n")
        rows = zip(report.directions, report.exponents, report.ridge_ratios, report.in_set)
        for w, e, r, flag in rows:
            coords = ",".join(f"{c:.17g}" for c in w)
            fh.write(f"{coords},{e:.17g},{r:.17g},{int(flag)}\n")


def jsonable(obj):
    """Recursively convert reports and values into JSON-ready structures."""
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.complexfloating):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()] if obj.dtype.kind == "c" else obj.tolist()
    if isinstance(obj, AxisSpec):
        return {"n": obj.n, "half_width": obj.half_width}
    if isinstance(obj, GridSpec):
        return {"axes": [jsonable(a) for a in obj.axes]}
    if isinstance(obj, SubspaceSpec):
        return {"dim": obj.dim, "basis": obj.basis.T.tolist()}
    if isinstance(obj, GridFunction):
        return {"grid": jsonable(obj.spec), "values": "(stored as PSF1)"}
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {}
        for fld in dataclasses.fields(obj):
            if fld.name.startswith("_"):
                continue
            out[fld.name] = jsonable(getattr(obj, fld.name))
        return out
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    raise InvalidFormat(f"cannot serialize {type(obj).__name__} to JSON")


def save_json(path: str, obj) -> None:
    text = json.dumps(jsonable(obj), indent=2, sort_keys=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")


# --- signal and window descriptions ---------------------------------------


def _complex_in(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, dict) and set(v) <= {"re", "im"}:
        return complex(float(v.get("re", 0.0)), float(v.get("im", 0.0)))
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise InvalidFormat(f"expected a number, [re, im] or {{re, im}}, got {v!r}")


def signal_to_json(s: Signal):
    """Constructor-shaped description of a signal (manifest use)."""
    if isinstance(s, PointMass):
        return {"type": "point_mass", "x0": list(s.location), "weight": jsonable(complex(s.weight))}
    if isinstance(s, Constant):
        return {"type": "constant", "value": jsonable(complex(s.value)), "dim": s.dim}
    if isinstance(s, GaussianPacket):
        return {
            "type": "gaussian_packet",
            "x0": list(s.center),
            "xi0": list(s.modulation),
            "sigma": s.sigma,
            "B": None if s.chirp is None else [list(r) for r in s.chirp],
        }
    if isinstance(s, TensorProduct):
        return {"type": "tensor_product", "factors": [signal_to_json(f) for f in s.factors]}
    if isinstance(s, LinearCombination):
        return {
            "type": "linear_combination",
            "terms": [{"coeff": jsonable(complex(c)), "signal": signal_to_json(t)} for c, t in s.terms],
        }
    if isinstance(s, Pullback):
        return {"type": "pullback", "matrix": s.matrix.tolist(), "base": signal_to_json(s.base)}
    if isinstance(s, Sampled):
        return {"type": "sampled", "grid": jsonable(s.data.spec)}
    raise InvalidFormat(f"no JSON description for signal {type(s).__name__}")


def signal_from_json(desc, spec: GridSpec | None = None) -> Signal:
    """Materialize a signal description; grid-bound kinds need spec."""
    if not isinstance(desc, dict) or "type" not in desc:
        raise InvalidFormat("signal description must be an object with a 'type'")
    kind = desc["type"]
    if kind == "point_mass":
        return PointMass(tuple(float(v) for v in desc["x0"]), _complex_in(desc.get("weight", 1.0)))
    if kind == "constant":
        return Constant(_complex_in(desc.get("value", 1.0)), int(desc["dim"]))
    if kind == "gaussian_packet":
        B = desc.get("B")
        chirp = None if B is None else tuple(tuple(float(v) for v in row) for row in B)
        return GaussianPacket(
            tuple(float(v) for v in desc["x0"]),
            tuple(float(v) for v in desc["xi0"]),
            float(desc.get("sigma", 1.0)),
            chirp,
        )
    if kind == "tensor_product":
        return TensorProduct(tuple(signal_from_json(f, spec) for f in desc["factors"]))
    if kind == "linear_combination":
        terms = tuple(
            (_complex_in(t["coeff"]), signal_from_json(t["signal"], spec)) for t in desc["terms"]
        )
        return LinearCombination(terms)
    if kind == "pullback":
        base = signal_from_json(desc["base"], spec)
        return Pullback(base, np.asarray(desc["matrix"], dtype=np.float64))
    if kind == "chirp":
        if spec is None:
            raise InvalidFormat("a chirp signal needs a grid to materialize")
        B = np.asarray(desc["B"], dtype=np.float64)
        pts = spec.points()
        quad = np.einsum("ni,ij,nj->n", pts, B, pts).reshape(spec.shape)
        return Sampled(GridFunction(spec, np.exp(0.5j * quad)))
    if kind == "sampled":
        if "path" not in desc:
            raise InvalidFormat("a sampled signal description needs a 'path'")
        f, _ = load_field(desc["path"])
        return Sampled(f)
    raise InvalidFormat(f"unknown signal type {kind!r}")


def window_to_json(g: Window):
    if isinstance(g, StandardGaussian):
        return {"type": "standard_gaussian", "dim": g.dim}
    if isinstance(g, SampledWindow):
        return {"type": "sampled", "grid": jsonable(g.data.spec), "trail": list(g.trail)}
    raise InvalidFormat(f"no JSON description for window {type(g).__name__}")


def window_from_json(desc, spec: GridSpec | None = None) -> Window:
    """Materialize a window description; derived kinds need spec."""
    if not isinstance(desc, dict) or "type" not in desc:
        raise InvalidFormat("window description must be an object with a 'type'")
    kind = desc["type"]
    if kind == "standard_gaussian":
        return StandardGaussian(int(desc.get("dim", spec.dim if spec else 1)))
    if kind == "sampled":
        if "path" not in desc:
            raise InvalidFormat("a sampled window description needs a 'path'")
        f, _ = load_field(desc["path"])
        return SampledWindow(f, ("loaded",))
    base = desc.get("base")
    if kind in ("moment", "chirped", "pullback"):
        if spec is None:
            raise InvalidFormat(f"a {kind} window needs a grid to materialize")
        g = StandardGaussian(spec.dim) if base is None else window_from_json(base, spec)
        if kind == "moment":
            return window_moment(g, tuple(int(b) for b in desc["beta"]), spec)
        if kind == "chirped":
            return window_chirp(g, np.asarray(desc["B"], dtype=np.float64), spec)
        return window_pullback(g, np.asarray(desc["matrix"], dtype=np.float64), spec)
    raise InvalidFormat(f"unknown window type {kind!r}")


def metaplectic_from_json(desc) -> MetaplecticElement:
    """Single element from an object, composition from an ordered array."""
    if isinstance(desc, list):
        return Composition(tuple(metaplectic_from_json(d) for d in desc))
    if not isinstance(desc, dict) or "type" not in desc:
        raise InvalidFormat("metaplectic description must be an object with a 'type'")
    kind = desc["type"]
    if kind == "fourier":
        return FourierRot(int(desc.get("dim", 1)))
    if kind == "coord_change":
        return CoordChange(np.asarray(desc["matrix"], dtype=np.float64))
    if kind == "shear":
        return Shear(np.asarray(desc["matrix"], dtype=np.float64))
    if kind == "shift":
        return Shift(
            tuple(float(v) for v in desc["x0"]),
            tuple(float(v) for v in desc["xi0"]),
        )
    raise InvalidFormat(f"unknown metaplectic type {kind!r}")


def subspace_from_json(desc) -> SubspaceSpec:
    """{"basis": [[...]], "dim": d}; rows span Y, empty basis needs dim."""
    if not isinstance(desc, dict) or "basis" not in desc:
        raise InvalidFormat("subspace description must be an object with a 'basis'")
    rows = desc["basis"]
    if rows:
        return make_subspace(np.asarray(rows, dtype=np.float64), desc.get("dim"))
    if "dim" not in desc:
        raise InvalidFormat("an empty basis needs an explicit 'dim'")
    d = int(desc["dim"])
    return make_subspace(np.zeros((0, d)), d)


def symbol_from_json(desc, spec: GridSpec | None = None) -> SymbolGrid:
    """Named corpus symbol on spec, or PSF1 samples with declared order."""
    if not isinstance(desc, dict):
        raise InvalidFormat("symbol description must be an object")
    if "path" in desc:
        if "order" not in desc:
            raise InvalidFormat("a stored symbol needs a declared 'order'")
        return load_symbol(desc["path"], float(desc["order"]), float(desc.get("rho", 1.0)))
    if "kind" not in desc:
        raise InvalidFormat("symbol description needs a 'kind' or a 'path'")
    if spec is None:
        raise InvalidFormat("a named symbol needs a grid to materialize")
    kwargs = {}
    if "degree" in desc:
        kwargs["degree"] = float(desc["degree"])
    if desc.get("rho") is not None:
        kwargs["rho"] = float(desc["rho"])
    return make_symbol(str(desc["kind"]), spec, **kwargs)
