"""JSON reading and writing for complexes, algebras, modules and extensions.

Every object carries ``"schema": "dgmod/1"`` and a ``kind``.  Matrices are
stored sparsely as lists of index tuples followed by the coefficient, and
every coefficient is a string so rationals survive exactly.  ``dumps`` is
canonical (sorted keys, fixed indentation, entries in index order), so
``dumps(load(text)) == text`` for any text that ``dumps`` produced.

Besides the explicit form, an algebra or module may be given as a preset,
e.g. ``{"kind": "algebra", "preset": "truncated_polynomial", "nvars": 2,
"power": 2, "field": "p:2"}``; presets are expanded on load.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .algebra import (DGAlgebra, dual_numbers, field_algebra, koszul, minimal_generators, monomial_algebra,
                      truncated_polynomial)
from .complexes import Complex
from .extensions import ExtensionClass
from .linalg import Field, FieldError
from .modules import (DGModule, direct_sum_modules, free_module, linear_dual, regular_module, residue_module,
                      shift_module)

SCHEMA = "dgmod/1"


class SchemaError(ValueError):
    """Input that does not describe a valid object (exit code 2 in the CLI)."""


# -- sparse encoding ------------------------------------------------------------

def _sparse(F: Field, a: np.ndarray) -> list:
    a = np.asarray(a)
    idx = np.argwhere(a != 0)
    return [[int(i) for i in ix] + [F.fmt(a[tuple(ix)])] for ix in idx]


def _dense(F: Field, entries, shape) -> np.ndarray:
    out = F.zeros(shape)
    for e in entries or []:
        if len(e) != len(shape) + 1:
            raise SchemaError(f"entry {e!r} should have {len(shape)} indices and a coefficient")
        ix = tuple(int(i) for i in e[:-1])
        if any(not 0 <= i < s for i, s in zip(ix, shape)):
            raise SchemaError(f"entry {e!r} is out of range for shape {shape}")
        try:
            out[ix] = F.scalar(e[-1])
        except (FieldError, ValueError, ZeroDivisionError) as exc:
            raise SchemaError(f"bad coefficient {e[-1]!r}: {exc}") from None
    return out


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


# -- encoders ------------------------------------------------------------------------

def complex_to_json(c: Complex) -> dict:
    return {"schema": SCHEMA, "kind": "complex", "field": c.field.name,
            "degrees": [int(x) for x in c.degs], "differential": _sparse(c.field, c.d)}


def algebra_to_json(u: DGAlgebra) -> dict:
    F = u.field
    # mult[a][k, b]: coefficient of e_k in e_a e_b, written as [a, b, k, c]
    mult = [[a, b, k, c] for a, k, b, c in _sparse(F, u.mult)]
    mult.sort(key=lambda e: e[:3])
    return {"schema": SCHEMA, "kind": "algebra", "field": F.name, "name": u.name,
            "degrees": [int(x) for x in u.degs], "differential": _sparse(F, u.d),
            "mult": mult, "unit": _sparse(F, u.unit)}


def module_to_json(m: DGModule) -> dict:
    F = m.field
    out = {"schema": SCHEMA, "kind": "module", "field": F.name, "algebra": algebra_to_json(m.algebra),
           "degrees": [int(x) for x in m.degs], "differential": _sparse(F, m.d),
           "action": _sparse(F, m.act)}
    if m.semibasis is not None:
        out["semibasis"] = _sparse(F, m.semibasis)
    return out


def extension_to_json(e: ExtensionClass) -> dict:
    F = e.field
    return {"schema": SCHEMA, "kind": "extension", "field": F.name,
            "source": module_to_json(e.source), "target": module_to_json(e.target),
            "gamma": _sparse(F, e.gamma), "theta": _sparse(F, e.theta)}


def to_json(obj) -> dict:
    if isinstance(obj, DGModule):
        return module_to_json(obj)
    if isinstance(obj, DGAlgebra):
        return algebra_to_json(obj)
    if isinstance(obj, ExtensionClass):
        return extension_to_json(obj)
    if isinstance(obj, Complex):
        return complex_to_json(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


# -- decoders ---------------------------------------------------------------------

def _field(data: dict, override: Field | None) -> Field:
    if override is not None:
        return override
    try:
        return Field.parse(data.get("field", "Q"))
    except FieldError as exc:
        raise SchemaError(str(exc)) from None


def _check(data, kind: str):
    if not isinstance(data, dict):
        raise SchemaError(f"expected a JSON object for a {kind}")
    if data.get("schema", SCHEMA) != SCHEMA:
        raise SchemaError(f"unsupported schema {data.get('schema')!r}")
    if data.get("kind") != kind:
        raise SchemaError(f"expected kind {kind!r}, got {data.get('kind')!r}")


def _degrees(data) -> np.ndarray:
    try:
        return np.array([int(x) for x in data["degrees"]], dtype=np.int64)
    except (KeyError, TypeError, ValueError):
        raise SchemaError("missing or malformed 'degrees'") from None


def complex_from_json(data, field: Field | None = None, base_dir: Path | None = None) -> Complex:
    data, _ = _resolve(data, base_dir)
    _check(data, "complex")
    F = _field(data, field)
    degs = _degrees(data)
    return Complex(F, degs, _dense(F, data.get("differential"), (len(degs), len(degs))))


def _algebra_preset(data: dict, F: Field, base_dir: Path | None) -> DGAlgebra:
    kind = data["preset"]
    name = data.get("name", "")
    if kind == "field":
        return field_algebra(F)
    if kind == "truncated_polynomial":
        return truncated_polynomial(F, int(data["nvars"]), int(data["power"]), name=name)
    if kind == "monomial":
        return monomial_algebra(F, [tuple(m) for m in data["monomials"]], name=name)
    if kind == "koszul":
        base = algebra_from_json(data["base"], F, base_dir)
        seq = data.get("sequence", "minimal")
        if seq == "minimal":
            seq = minimal_generators(base)
        else:
            seq = [_dense(F, v, (base.n,)) for v in seq]
        return koszul(base, seq, name=name)
    if kind == "dual_numbers":
        return dual_numbers(algebra_from_json(data["base"], F, base_dir))
    raise SchemaError(f"unknown algebra preset {kind!r}")


def _resolve(ref, base_dir: Path | None):
    if isinstance(ref, str):
        path = Path(ref) if base_dir is None else base_dir / ref
        return read_json(path), path.parent
    return ref, base_dir


def algebra_from_json(data, field: Field | None = None, base_dir: Path | None = None) -> DGAlgebra:
    data, base_dir = _resolve(data, base_dir)
    _check(data, "algebra")
    F = _field(data, field)
    try:
        if "preset" in data:
            return _algebra_preset(data, F, base_dir)
        degs = _degrees(data)
        n = len(degs)
        d = _dense(F, data.get("differential"), (n, n))
        mult = F.zeros((n, n, n))
        for e in data.get("mult", []):
            a, b, k = (int(x) for x in e[:3])
            mult[a, k, b] = _dense(F, [[0, e[3]]], (1,))[0]
        unit = _dense(F, data.get("unit"), (n,))
        return DGAlgebra(F, degs, d, mult, unit, name=data.get("name", ""))
    except SchemaError:
        raise
    except (KeyError, TypeError, IndexError) as exc:
        raise SchemaError(f"malformed algebra: {exc!r}") from None


def _module_preset(data: dict, F: Field, base_dir: Path | None) -> DGModule:
    kind = data["preset"]
    if kind in ("dual", "shift"):
        m = module_from_json(data["of"], F, base_dir)
        return linear_dual(m) if kind == "dual" else shift_module(m, int(data["by"]))
    if kind == "sum":
        return direct_sum_modules(*[module_from_json(x, F, base_dir) for x in data["of"]])
    U = algebra_from_json(data["algebra"], F, base_dir)
    if kind == "regular":
        return regular_module(U)
    if kind == "residue":
        return residue_module(U)
    if kind == "free":
        return free_module(U, [int(s) for s in data["shifts"]])
    raise SchemaError(f"unknown module preset {kind!r}")


def module_from_json(data, field: Field | None = None, base_dir: Path | None = None) -> DGModule:
    data, base_dir = _resolve(data, base_dir)
    _check(data, "module")
    F = _field(data, field)
    try:
        if "preset" in data:
            return _module_preset(data, F, base_dir)
        U = algebra_from_json(data["algebra"], F, base_dir)
        degs = _degrees(data)
        r = len(degs)
        d = _dense(F, data.get("differential"), (r, r))
        act = _dense(F, data.get("action"), (U.n, r, r))
        sb = data.get("semibasis")
        if sb is not None:
            cols = 1 + max((int(e[1]) for e in sb), default=-1)
            sb = _dense(F, sb, (r, cols))
        return DGModule(U, degs, d, act, sb)
    except SchemaError:
        raise
    except (KeyError, TypeError, IndexError) as exc:
        raise SchemaError(f"malformed module: {exc!r}") from None


def extension_from_json(data, field: Field | None = None, base_dir: Path | None = None) -> ExtensionClass:
    data, base_dir = _resolve(data, base_dir)
    _check(data, "extension")
    F = _field(data, field)
    M = module_from_json(data["source"], F, base_dir)
    N = module_from_json(data["target"], F, base_dir)
    g = _dense(F, data.get("gamma"), (N.n, M.n))
    t = _dense(F, data.get("theta"), (M.algebra.n, N.n, M.n))
    return ExtensionClass(M, N, g, t)


_LOADERS = {"complex": complex_from_json, "algebra": algebra_from_json,
            "module": module_from_json, "extension": extension_from_json}


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from None


def load(data, field: Field | None = None, base_dir: Path | None = None):
    if not isinstance(data, dict) or data.get("kind") not in _LOADERS:
        raise SchemaError(f"unknown object kind {data.get('kind') if isinstance(data, dict) else data!r}")
    return _LOADERS[data["kind"]](data, field, base_dir)


def load_file(path, field: Field | None = None):
    path = Path(path)
    return load(read_json(path), field, path.parent)
