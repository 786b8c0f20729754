"""Command-line front end: one job per invocation.

    dgmod validate algebra.json
    dgmod ext M.json N.json --lo 0 --hi 3 --bound 6 --json
    dgmod voigt k.json
    dgmod orbits R.json --dims 2
    dgmod scan-sdm R.json --bound 6 --max-q-power 24

Exit codes: 0 success, 1 domain error (message from the library), 2 parse or
I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path

from . import io
from .algebra import DGAlgebra, koszul, minimal_generators, validate_algebra
from .complexes import Complex, GradedSpace, HOMOLOGICALLY_TRIVIAL, homology_dims, inf_sup_amp, validate_complex
from .extensions import ExtensionClass, baer_sum, is_split, yext1
from .finiteness import finiteness_experiment
from .homological import betti_bass, ext_dims, ext_required_bound, tor_dims, tor_required_bound
from .linalg import Field
from .moduli import enumerate_points, orbit_decompose, orbit_tangent, tangent_space, tangent_space_jacobian, \
    voigt_check
from .modules import DGModule, validate_module

VERBS = ("validate", "homology", "ext", "tor", "betti", "yext1", "baer-sum", "is-split",
         "tangent", "orbits", "voigt", "scan-sdm", "koszul")
ARITY = {"ext": 2, "tor": 2, "yext1": 2, "baer-sum": 2}


class UsageError(ValueError):
    pass


@dataclass
class Job:
    verb: str
    inputs: list[str]
    options: dict = dc_field(default_factory=dict)
    output: str | None = None

    def check(self):
        if self.verb not in VERBS:
            raise UsageError(f"unknown verb {self.verb!r}")
        want = ARITY.get(self.verb, 1)
        if len(self.inputs) != want:
            raise UsageError(f"{self.verb} takes {want} input file(s), got {len(self.inputs)}")
        for p in self.inputs:
            if not Path(p).is_file():
                raise UsageError(f"no such file: {p}")
        b = self.options.get("bound")
        if b is not None and b <= 0:
            raise UsageError("--bound must be positive")


def _load(job: Job, i: int = 0):
    f = job.options.get("field")
    return io.load_file(job.inputs[i], Field.parse(f) if f else None)


def _expect(obj, *types):
    if not isinstance(obj, types):
        names = " or ".join(t.__name__ for t in types)
        raise io.SchemaError(f"expected {names}, got {type(obj).__name__}")
    return obj


def _as_complex(obj) -> Complex:
    return obj if isinstance(obj, Complex) else obj.complex


def _validate(job):
    obj = _load(job)
    if isinstance(obj, DGAlgebra):
        rep = validate_algebra(obj)
    elif isinstance(obj, DGModule):
        rep = validate_module(obj)
    elif isinstance(obj, ExtensionClass):
        rep = validate_module(obj.assemble())
    else:
        rep = validate_complex(obj)
    return {"verdict": "valid" if rep.ok else "invalid", "failures": rep.failures}, obj


def _homology(job):
    obj = _load(job)
    c = _as_complex(obj)
    isa = inf_sup_amp(c)
    out = {"homology": {str(k): v for k, v in homology_dims(c).items()}}
    if isa is HOMOLOGICALLY_TRIVIAL:
        out["amplitude"] = "homologically trivial"
    else:
        out.update({"inf": isa[0], "sup": isa[1], "amplitude": isa[2]})
    return out, obj


def _window(job, n: DGModule, tor: bool):
    lo = job.options.get("lo", 0)
    hi = job.options.get("hi", 3)
    need = tor_required_bound(n, hi) if tor else ext_required_bound(n, hi)
    bound = job.options.get("bound") or need
    return lo, hi, bound


def _ext(job, tor=False):
    m = _expect(_load(job, 0), DGModule)
    n = _expect(_load(job, 1), DGModule)
    lo, hi, bound = _window(job, n, tor)
    dims = (tor_dims if tor else ext_dims)(m, n, lo, hi, bound)
    return {"dims": {str(k): v for k, v in dims.items()}, "window": [lo, hi], "bound": bound}, None


def _betti(job):
    m = _expect(_load(job), DGModule)
    bound = job.options.get("bound") or 4
    return betti_bass(m, bound).to_json(), None


def _yext1(job):
    m = _expect(_load(job, 0), DGModule)
    n = _expect(_load(job, 1), DGModule)
    y = yext1(m, n)
    return {"dim": y.dim, "classes": [{"gamma": io._sparse(m.field, c.gamma), "theta": io._sparse(m.field, c.theta)}
                                      for c in y.classes]}, None


def _baer(job):
    e1 = _expect(_load(job, 0), ExtensionClass)
    e2 = _expect(_load(job, 1), ExtensionClass)
    b = baer_sum(e1, e2)
    return {"agree": b.agree, "sum": io.extension_to_json(b.categorical)}, None


def _is_split(job):
    e = _expect(_load(job), ExtensionClass)
    if not e.is_cocycle():
        raise ValueError("input does not satisfy the extension conditions")
    D = is_split(e)
    out = {"split": D is not None}
    if D is not None:
        out["section_D"] = io._sparse(e.field, D)
    return out, None


def _tangent(job):
    m = _expect(_load(job), DGModule)
    t, j, o = tangent_space(m), tangent_space_jacobian(m), orbit_tangent(m)
    return {"tangent_dim": t.dim, "tangent_dim_jacobian": j.dim, "orbit_tangent_dim": o.dim,
            "unknowns": t.layout.size}, None


def _voigt(job):
    m = _expect(_load(job), DGModule)
    return voigt_check(m).to_json(), None


def _orbits(job):
    u = _expect(_load(job), DGAlgebra)
    dims = job.options.get("dims") or [1]
    space = GradedSpace(job.options.get("min_degree", 0), tuple(dims))
    pts = enumerate_points(u, space, max_q_power=job.options.get("max_q_power", 24),
                           max_points=job.options.get("max_points"), workers=job.options.get("workers", 1))
    recs = orbit_decompose(pts, u, space)
    return {"points": len(pts), "orbits": len(recs), "records": [r.to_json() for r in recs],
            "space": {"min_degree": space.min_degree, "dims": list(space.dims)}}, None


def _scan(job):
    u = _expect(_load(job), DGAlgebra)
    rep = finiteness_experiment(u, max_q_power=job.options.get("max_q_power", 24),
                                bound=job.options.get("bound") or 6, max_points=job.options.get("max_points"))
    return rep.to_json(), None


def _koszul(job):
    u = _expect(_load(job), DGAlgebra)
    k = koszul(u, minimal_generators(u))
    return {"algebra": io.algebra_to_json(k),
            "homology": {str(a): b for a, b in homology_dims(k.complex).items()}}, None


HANDLERS = {"validate": _validate, "homology": _homology, "ext": _ext, "tor": lambda j: _ext(j, tor=True),
            "betti": _betti, "yext1": _yext1, "baer-sum": _baer, "is-split": _is_split, "tangent": _tangent,
            "orbits": _orbits, "voigt": _voigt, "scan-sdm": _scan, "koszul": _koszul}


def run(job: Job) -> tuple[int, dict]:
    """Execute a job; returns (exit code, report)."""
    try:
        job.check()
        report, obj = HANDLERS[job.verb](job)
    except (io.SchemaError, UsageError, OSError, json.JSONDecodeError) as exc:
        return 2, {"verb": job.verb, "error": str(exc)}
    except (ValueError, ZeroDivisionError, ArithmeticError) as exc:
        return 1, {"verb": job.verb, "error": str(exc)}
    report = {"verb": job.verb, **report}
    if job.options.get("echo"):
        if obj is None:
            obj = _load(job)
        report["echo"] = io.to_json(obj)
    return 0, report


def _text(report: dict) -> str:
    lines = []
    for k, v in report.items():
        if k == "echo":
            continue
        if isinstance(v, (dict, list)):
            v = json.dumps(v, sort_keys=True)
        lines.append(f"{k}: {v}")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dgmod", description="Exact computations with finite-dimensional DG modules")
    p.add_argument("verb", choices=VERBS)
    p.add_argument("inputs", nargs="+", help="JSON input file(s)")
    p.add_argument("--field", help="override the field of the inputs: q or p:<prime>")
    p.add_argument("--bound", type=int, help="resolution bound / semidualizing window")
    p.add_argument("--lo", type=int, default=0)
    p.add_argument("--hi", type=int, default=3)
    p.add_argument("--dims", type=int, nargs="+", help="graded dimensions r_i for orbits")
    p.add_argument("--min-degree", type=int, default=0)
    p.add_argument("--max-points", type=int)
    p.add_argument("--max-q-power", type=int, default=24)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--json", action="store_true", help="emit the JSON report")
    p.add_argument("--echo", action="store_true", help="include the parsed input in canonical form")
    p.add_argument("--output", "-o", help="write the report here instead of stdout")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    opts = {k: getattr(args, k) for k in ("field", "bound", "lo", "hi", "dims", "min_degree", "max_points",
                                          "max_q_power", "workers", "echo")}
    job = Job(args.verb, args.inputs, opts, args.output)
    code, report = run(job)
    if code:
        print(f"error: {report['error']}", file=sys.stderr)
    if args.echo and not args.json and code == 0:
        text = io.dumps(report["echo"])
    else:
        text = io.dumps(report) if args.json else _text(report)
    if job.output:
        try:
            Path(job.output).write_text(text)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
