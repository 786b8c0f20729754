"""Desk-scale census of semidualizing modules over a local artinian ring.

Pipeline: Koszul algebra on minimal generators, an amplitude sanity check,
the rank bound lambda from Betti/Bass inequalities, then enumeration of
module points, the semidualizing filter and an orbit census.  Points are
scanned over the ring itself in degree 0; larger ranks than the budget
allows are listed as skipped and the report is marked partial.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field as dc_field

from .algebra import DGAlgebra, is_local, koszul, koszul_inclusion, minimal_generators
from .complexes import GradedSpace, HOMOLOGICALLY_TRIVIAL, inf_sup_amp
from .homological import bass_numbers, is_semidualizing_up_to
from .moduli import BudgetError, enumerate_points, orbit_decompose, point_key, _Search
from .modules import DGModule, base_change, linear_dual, regular_module, residue_module


@dataclass
class FinitenessReport:
    algebra: str
    n_generators: int
    s: int
    koszul_dims: dict
    bass_R: dict
    lam: int
    rank_bound: int
    amplitude_checks: list = dc_field(default_factory=list)
    scanned: list = dc_field(default_factory=list)
    skipped: list = dc_field(default_factory=list)
    classes: list = dc_field(default_factory=list)
    separation: dict = dc_field(default_factory=dict)
    seconds: float = 0.0

    @property
    def partial(self) -> bool:
        return bool(self.skipped)

    @property
    def count(self) -> int:
        return len(self.classes)

    def to_json(self) -> dict:
        return {"algebra": self.algebra, "n_generators": self.n_generators, "s": self.s,
                "koszul_dims": {str(k): v for k, v in self.koszul_dims.items()},
                "bass_R": {str(k): v for k, v in self.bass_R.items()},
                "lambda": self.lam, "rank_bound": self.rank_bound,
                "amplitude_checks": self.amplitude_checks, "scanned": self.scanned,
                "skipped": self.skipped, "classes": self.classes, "count": self.count,
                "partial": self.partial, "separation": self.separation}


def _amp(m: DGModule):
    x = inf_sup_amp(m.complex)
    return None if x is HOMOLOGICALLY_TRIVIAL else x[2]


def koszul_rank_bound(kdims: dict, bass: dict, s: int) -> int:
    """lambda = sum_{i<=s} sum_{j<=i} n_{i-j} mu^j(R)  (artinian case, depth 0)."""
    return sum(kdims.get(i - j, 0) * bass.get(j, 0) for i in range(s + 1) for j in range(i + 1))


def finiteness_experiment(r: DGAlgebra, max_q_power: int = 24, bound: int = 6,
                          max_points: int | None = None) -> FinitenessReport:
    t0 = time.perf_counter()
    F = r.field
    if not F.p:
        raise BudgetError("the scan needs a finite field")
    if not r.is_degree_zero():
        raise ValueError("expects an algebra concentrated in degree 0")
    local = is_local(r)
    if local is None:
        raise ValueError("algebra is not local")
    gens = minimal_generators(r, local)
    n = len(gens)
    K = koszul(r, gens, name=f"K({r.name})")
    kdims = {i: K.dim(i) for i in range(n + 1)}
    s = n  # dim R - depth R = 0 for artinian R
    R = regular_module(r)
    bass = bass_numbers(R, 0, s)
    lam = koszul_rank_bound(kdims, bass, s)
    rank_bound = kdims[0] * bass[0]
    rep = FinitenessReport(r.name, n, s, kdims, bass, lam, rank_bound)

    inc = koszul_inclusion(r, K)
    for label, c in (("R", R), ("dual", linear_dual(R)), ("k", residue_module(r, local))):
        a, ak = _amp(c), _amp(base_change(inc, c))
        rep.amplitude_checks.append({"module": label, "amp": a, "amp_koszul": ak,
                                     "ok": a is not None and ak is not None and ak <= a + n})

    found: dict[bytes, dict] = {}
    for rk in range(1, rank_bound + 1):
        space = GradedSpace(0, (rk,))
        nv = len(_Search(r, space.degrees()).var)
        if nv > max_q_power:
            rep.skipped.append({"rank": rk, "unknowns": nv, "reason": f"{F.size}^{nv} over budget"})
            continue
        pts = enumerate_points(r, space, max_q_power=max_q_power, max_points=max_points)
        orbits = orbit_decompose(pts, r, space)
        nsdm = 0
        for o in orbits:
            v = is_semidualizing_up_to(o.representative, bound)
            if v.ok:
                nsdm += 1
                rec = {"rank": rk, "orbit_size": o.orbit_size, "stabilizer_order": o.stabilizer_order,
                       "verdict": v.verdict}
                rep.classes.append(rec)
                for i in o.members:
                    found[point_key(pts[i])] = rec
        rep.scanned.append({"rank": rk, "points": len(pts), "orbits": len(orbits), "semidualizing": nsdm})

    # R and its dual live on the same graded space; distinct orbits certify they differ
    kR, kD = point_key(R), point_key(linear_dual(R))
    oR, oD = found.get(kR), found.get(kD)
    rep.separation = {"R_found": oR is not None, "dual_found": oD is not None,
                      "separated": oR is not None and oD is not None and oR is not oD}
    rep.seconds = time.perf_counter() - t0
    return rep
