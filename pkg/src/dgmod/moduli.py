"""Module varieties Mod^U(W), the group GL(W)_0 and their tangent spaces.

A point of Mod^U(W) is a DG U-module structure (d, act) on a fixed graded
space W; here it is simply a DGModule.  GL(W)_0 acts by conjugation and its
orbits are the isomorphism classes.  Over a finite field both the points and
the group can be listed, which gives orbit censuses.

Tangent vectors at M are pairs (gamma, theta) making W (+) W eps a DG module
over U[eps] that reduces to M.  They satisfy the same linear conditions as
the cochains describing extensions of M by itself, which is what ties the
tangent space to YExt^1(M, M).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .algebra import DGAlgebra, dual_numbers
from .complexes import GradedSpace
from .extensions import (CochainLayout, ExtensionClass, cocycle_system, coboundary_matrix, is_split,
                         splitting_section, yext1)
from .homological import ext_dims, ext_required_bound
from .linalg import Field, batch_inverse, column_basis, in_span, inverse, kernel_basis, rank
from .modules import DGModule, DGModuleMorphism, axiom_terms, check_morphism, validate_module


class BudgetError(ValueError):
    pass


# -- the group ------------------------------------------------------------------

@dataclass
class GLElement:
    """A degree-0 automorphism of W, stored as one block-diagonal matrix."""

    field: Field
    degs: np.ndarray
    matrix: np.ndarray

    def __post_init__(self):
        F = self.field
        self.matrix = F.reduce(self.matrix)
        r, c = np.nonzero(self.matrix != 0)
        if np.any(self.degs[r] != self.degs[c]):
            raise ValueError("automorphism is not homogeneous of degree 0")
        for i, blk in self.blocks().items():
            if rank(F, blk) != blk.shape[0]:
                raise ValueError(f"singular block in degree {i}")

    @classmethod
    def from_blocks(cls, F: Field, space: GradedSpace, blocks: dict) -> "GLElement":
        degs = space.degrees()
        m = F.eye(len(degs))
        for i, b in blocks.items():
            ix = np.flatnonzero(degs == i)
            m[np.ix_(ix, ix)] = F.array(b, shape=(len(ix), len(ix)))
        return cls(F, degs, m)

    def blocks(self) -> dict:
        out = {}
        for i in np.unique(self.degs):
            ix = np.flatnonzero(self.degs == i)
            out[int(i)] = self.matrix[np.ix_(ix, ix)]
        return out

    def inverse(self) -> "GLElement":
        return GLElement(self.field, self.degs, inverse(self.field, self.matrix))

    def __matmul__(self, other: "GLElement") -> "GLElement":
        return GLElement(self.field, self.degs, self.field.matmul(self.matrix, other.matrix))


def act(alpha: GLElement, m: DGModule) -> DGModule:
    """alpha . (d, act) = (alpha d alpha^-1, alpha act_a alpha^-1)."""
    F = m.field
    if alpha.matrix.shape != (m.n, m.n) or not np.array_equal(alpha.degs, m.degs):
        raise ValueError("automorphism does not match the graded space of the module")
    g, gi = alpha.matrix, inverse(F, alpha.matrix)
    d = F.reduce(F.matmul(F.matmul(g, m.d), gi))
    a = F.reduce(np.matmul(np.matmul(g[None], m.act), gi[None]))
    return DGModule(m.algebra, m.degs.copy(), d, a)


def _act_batch(F: Field, G, Gi, d, a):
    """Conjugate (d, act) by a stack of automorphisms; flat rows (k, r*r + n*r*r)."""
    k = G.shape[0]
    dd = np.matmul(np.matmul(G, d), Gi) % F.p
    aa = np.matmul(np.matmul(G[:, None], a[None]), Gi[:, None]) % F.p
    return np.concatenate([dd.reshape(k, -1), aa.reshape(k, -1)], axis=1)


def gl_order(q: int, dims) -> int:
    """|GL(W)_0(F_q)| = prod_i prod_{j < r_i} (q^r_i - q^j)."""
    out = 1
    for r in dims:
        for j in range(r):
            out *= q ** r - q ** j
    return out


def gl_elements(F: Field, space: GradedSpace, budget: int = 1 << 16):
    """All elements of GL(W)_0 over F_p with their inverses, as (k, r, r) stacks."""
    if not F.p:
        raise BudgetError("group enumeration needs a finite field")
    q = F.size
    raw = sum(r * r for r in space.dims)
    if q ** raw > budget:
        raise BudgetError(f"GL(W)_0 enumeration needs {q}^{raw} candidates, over budget {budget}")
    degs = space.degrees()
    r = len(degs)
    G = np.broadcast_to(np.eye(r, dtype=np.int64), (1, r, r)).copy()
    Gi = G.copy()
    for i, dim in zip(range(space.min_degree, space.max_degree + 1), space.dims):
        if not dim:
            continue
        vals = np.array(np.meshgrid(*([np.arange(q)] * (dim * dim)), indexing="ij")).reshape(dim * dim, -1).T
        blocks = vals.reshape(-1, dim, dim)
        ok, inv = batch_inverse(F, blocks)
        blocks, inv = blocks[ok], inv[ok]
        ix = np.flatnonzero(degs == i)
        nG = np.repeat(G, len(blocks), axis=0)
        nGi = np.repeat(Gi, len(blocks), axis=0)
        tb = np.tile(blocks, (len(G), 1, 1))
        ti = np.tile(inv, (len(G), 1, 1))
        nG[:, ix[:, None], ix[None, :]] = tb
        nGi[:, ix[:, None], ix[None, :]] = ti
        G, Gi = nG, nGi
    return G.astype(F.dtype), Gi.astype(F.dtype)


# -- tangent spaces -------------------------------------------------------------------

@dataclass
class TangentVector:
    gamma: np.ndarray   # (r, r), degree -1
    theta: np.ndarray   # (n, r, r), theta[a] w = theta(a (x) w)


@dataclass
class TangentSpace:
    point: DGModule
    layout: CochainLayout
    basis: np.ndarray   # columns in layout coordinates

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def vector(self, coords) -> TangentVector:
        return TangentVector(*self.layout.unpack(coords))

    def vectors(self) -> list[TangentVector]:
        return [self.vector(self.basis[:, j]) for j in range(self.dim)]

    def contains(self, v: TangentVector) -> bool:
        return in_span(self.layout.field, self.basis, self.layout.pack(v.gamma, v.theta))


def tangent_space(m: DGModule) -> TangentSpace:
    """Kernel of the linearized axioms, written as the self-extension cocycle system."""
    F = m.field
    sys_ = cocycle_system(m, m)
    lay = sys_.layout
    if not lay.size:
        return TangentSpace(m, lay, F.zeros((0, 0)))
    Z = kernel_basis(F, sys_.matrix) if sys_.matrix.shape[0] else F.eye(lay.size)
    return TangentSpace(m, lay, Z)


def tangent_space_jacobian(m: DGModule) -> TangentSpace:
    """Same space, computed as the kernel of the Jacobian of the module axioms at m."""
    F, U = m.field, m.algebra
    lay = CochainLayout(m, m)
    if not lay.size:
        return TangentSpace(m, lay, F.zeros((0, 0)))
    g, t = lay.unpack_batch(F.eye(lay.size))
    one = axiom_terms(U, m.d, m.act, g, t, aL=t, const=False)
    two = axiom_terms(U, g, t, m.d, m.act, const=False)
    k = lay.size
    J = np.concatenate([F.reduce(one[key] + two[key]).reshape(k, -1) for key in sorted(one)], axis=1).T
    J = J[np.any(J != 0, axis=1)]
    Z = kernel_basis(F, J) if J.shape[0] else F.eye(k)
    return TangentSpace(m, lay, Z)


def assemble_tangent(m: DGModule, v: TangentVector, ue: DGAlgebra | None = None) -> DGModule:
    """W[eps] = W eps (+) W as a DG U[eps]-module; first block is the eps part."""
    U, F = m.algebra, m.field
    ue = ue or dual_numbers(U)
    z = F.zeros((m.n, m.n))
    d = np.block([[m.d, v.gamma], [z, m.d]])
    acts = [np.block([[z, m.act[a]], [z, z]]) for a in range(U.n)]
    acts += [np.block([[m.act[a], v.theta[a]], [z, m.act[a]]]) for a in range(U.n)]
    return DGModule(ue, np.concatenate([m.degs, m.degs]), F.reduce(d), F.reduce(np.stack(acts)))


def orbit_tangent(m: DGModule) -> TangentSpace:
    """Span of psi_M(D) = (D d - d D, D act - act D) over degree-0 maps D."""
    F = m.field
    lay = CochainLayout(m, m)
    B, _ = coboundary_matrix(m, m, lay)
    basis = column_basis(F, B) if B.size else F.zeros((lay.size, 0))
    return TangentSpace(m, lay, basis)


def tau(m: DGModule, v: TangentVector) -> ExtensionClass:
    """The self-extension 0 -> M -> W[eps] -> M -> 0 defined by a tangent vector."""
    return ExtensionClass(m, m, v.gamma, v.theta)


@dataclass
class VoigtReport:
    t_dim: int
    orbit_dim: int
    yext_dim: int
    tau_kernel_dim: int
    tau_rank: int
    witnesses_ok: bool

    @property
    def ok(self) -> bool:
        return (self.t_dim - self.orbit_dim == self.yext_dim and self.tau_kernel_dim == self.orbit_dim
                and self.tau_rank == self.yext_dim and self.witnesses_ok)

    @property
    def verdict(self) -> str:
        return "equal" if self.ok else "MISMATCH"

    def to_json(self) -> dict:
        return {"t_dim": self.t_dim, "orbit_dim": self.orbit_dim, "yext_dim": self.yext_dim,
                "tau_kernel_dim": self.tau_kernel_dim, "tau_rank": self.tau_rank,
                "witnesses_ok": self.witnesses_ok, "verdict": self.verdict}


def voigt_check(m: DGModule) -> VoigtReport:
    """Compare dim T^Mod - dim T^orbit with dim YExt^1(M, M), and test tau.

    The tangent space comes from the Jacobian, YExt^1 from the cocycle
    system, so the two sides are computed independently.  tau sends each
    tangent basis vector to its class; its kernel must be the orbit tangent,
    and every orbit generator must split with the section w -> (D w, w).
    """
    F = m.field
    T = tangent_space_jacobian(m)
    O = orbit_tangent(m)
    Y = yext1(m, m)
    coords = [Y.coordinates(tau(m, v)) for v in T.vectors()]
    C = np.stack(coords, axis=1) if coords and Y.dim else F.zeros((Y.dim, T.dim))
    r = rank(F, C) if C.size else 0
    ker = T.dim - r
    ok = True
    for v in O.vectors():
        e = tau(m, v)
        D = is_split(e)
        if D is None or not T.contains(v) or not check_morphism(splitting_section(e, D)).ok:
            ok = False
            break
    return VoigtReport(T.dim, O.dim, Y.dim, ker, r, ok)


# -- stabilizers ---------------------------------------------------------------------

@dataclass
class Stabilizer:
    lie_dim: int
    basis: np.ndarray          # (k, r, r) degree-0 endomorphisms commuting with the structure
    order: int | None = None


def stabilizer(m: DGModule, group_order: bool = False, budget: int = 1 << 16) -> Stabilizer:
    """Solutions of d alpha = alpha d and act_a alpha = alpha act_a in End(W)_0."""
    F = m.field
    B, (ri, cj) = coboundary_matrix(m, m)
    k = len(ri)
    K = kernel_basis(F, B) if B.shape[0] else F.eye(k)
    basis = F.zeros((K.shape[1], m.n, m.n))
    for j in range(K.shape[1]):
        basis[j, ri, cj] = K[:, j]
    out = Stabilizer(K.shape[1], basis)
    if group_order:
        if not F.p:
            raise BudgetError("group order needs a finite field")
        e = out.lie_dim
        if F.size ** e > budget:
            raise BudgetError(f"stabilizer has {F.size}^{e} candidates, over budget {budget}; "
                              "use a smaller instance")
        coeffs = np.array(np.meshgrid(*([np.arange(F.size)] * e), indexing="ij")).reshape(e, -1).T
        mats = np.einsum("ke,eij->kij", coeffs, basis.astype(np.int64)) % F.p
        ok, _ = batch_inverse(F, mats)
        out.order = int(ok.sum())
    return out


# -- enumeration of points over a finite field ------------------------------------------

class _Search:
    """Backtracking over the entries of (d, act) with early rejection.

    Unknowns are the homogeneous entries of d, then of act_a for every basis
    element a other than the unit (whose action is fixed by unitality).
    Each residual entry of the axioms is checked as soon as every unknown it
    depends on has been assigned.
    """

    def __init__(self, U: DGAlgebra, degs: np.ndarray):
        F = U.field
        self.U, self.F, self.degs = U, F, degs
        n, r = U.n, len(degs)
        self.r, self.shape_d = r, r * r
        nz = np.flatnonzero(U.unit != 0)
        if len(nz) != 1:
            raise ValueError("enumeration needs the unit to be a multiple of a basis vector")
        u = int(nz[0])
        base = F.zeros(r * r + n * r * r)
        act0 = F.zeros((n, r, r))
        act0[u] = F.reduce(F.eye(r) * F.inv(U.unit[u]))
        base[r * r:] = act0.ravel()
        self.base = base
        dmask = degs[:, None] == degs[None, :] - 1
        amask = degs[None, :, None] == U.degs[:, None, None] + degs[None, None, :]
        amask[u] = False
        self.var = np.concatenate([np.flatnonzero(dmask.ravel()), r * r + np.flatnonzero(amask.ravel())])
        self.ready = self._ready_steps(dmask, amask, act0 != 0)

    def _deps(self, pend):
        U, r = self.U, self.r
        Pd = pend[: r * r].reshape(r, r).astype(np.int64)
        Pa = pend[r * r:].reshape(U.n, r, r).astype(np.int64)
        Sd, Sa = self._Sd, self._Sa
        b = lambda x: x > 0
        dd = b(Pd @ Sd + Sd @ Pd)
        assoc = b(np.matmul(Pa[:, None], Sa[None]) + np.matmul(Sa[:, None], Pa[None])
                  + np.einsum("akb,kij->abij", (U.mult != 0).astype(np.int64), Pa))
        leib = b(np.matmul(Pd[None], Sa) + np.matmul(Sd[None], Pa) + np.matmul(Pa, Sd[None])
                 + np.matmul(Sa, Pd[None]) + np.einsum("ka,kij->aij", (U.d != 0).astype(np.int64), Pa))
        unit = np.zeros((r, r), dtype=bool)
        return np.concatenate([x.ravel() for x in (assoc, dd, leib, unit)])

    def _ready_steps(self, dmask, amask, fixed):
        self._Sd = dmask.astype(np.int64)
        self._Sa = (amask | fixed).astype(np.int64)
        nv = len(self.var)
        steps = None
        for s in range(nv, -1, -1):
            pend = np.zeros(len(self.base), dtype=bool)
            pend[self.var[s:]] = True
            dep = self._deps(pend)
            if steps is None:
                steps = np.full(dep.shape, -1)
            steps[~dep] = s
        return steps

    def residual(self, X):
        U, r = self.U, self.r
        k = X.shape[0]
        d = X[:, : r * r].reshape(k, r, r)
        a = X[:, r * r:].reshape(k, U.n, r, r)
        t = axiom_terms(U, d, a, d, a, a)
        return np.concatenate([t[key].reshape(k, -1) for key in sorted(t)], axis=1)

    def run(self, prefix=(), max_points=None):
        F, q = self.F, self.F.size
        X = self.base[None].copy()
        for s, v in enumerate(self.var):
            if s < len(prefix):
                X[:, v] = prefix[s]
            else:
                X = np.repeat(X, q, axis=0)
                X[:, v] = np.tile(np.arange(q), len(X) // q)
            check = np.flatnonzero(self.ready == s + 1)
            if s == 0:
                check = np.flatnonzero(self.ready <= 1)
            if len(check) and len(X):
                X = X[~np.any(self.residual(X)[:, check] != 0, axis=1)]
            if max_points is not None and s == len(self.var) - 1 and len(X) > max_points:
                raise BudgetError(f"more than {max_points} points")
        if not len(self.var) and len(X):
            X = X[~np.any(self.residual(X) != 0, axis=1)]
        return X.astype(F.dtype)


def _search_worker(args):
    U, degs, prefix = args
    return _Search(U, degs).run(prefix)


def point_key(m: DGModule) -> bytes:
    return np.concatenate([m.d.ravel(), m.act.ravel()]).astype(np.int64).tobytes()


def enumerate_points(U: DGAlgebra, space: GradedSpace, max_q_power: int = 24, max_points: int | None = None,
                     workers: int = 1) -> list[DGModule]:
    """All DG U-module structures on W over a finite prime field, sorted by encoding."""
    F = U.field
    if not F.p:
        raise BudgetError("enumeration needs a finite field")
    degs = space.degrees()
    r = len(degs)
    if not r:
        return [DGModule(U, degs, F.zeros((0, 0)), F.zeros((U.n, 0, 0)))]
    search = _Search(U, degs)
    nv = len(search.var)
    if nv > max_q_power:
        raise BudgetError(f"search space {F.size}^{nv} exceeds the budget {F.size}^{max_q_power}")
    if workers > 1 and nv >= 2:
        lead = min(nv, max(1, math.ceil(math.log(workers, F.size))))
        prefixes = [tuple(int(x) for x in np.unravel_index(i, [F.size] * lead)) for i in range(F.size ** lead)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_search_worker, [(U, degs, p) for p in prefixes]))
        X = np.concatenate(parts, axis=0)
    else:
        X = search.run(max_points=None)
    if max_points is not None and len(X) > max_points:
        raise BudgetError(f"found {len(X)} points, more than --max-points {max_points}")
    out = [DGModule(U, degs.copy(), x[: r * r].reshape(r, r).copy(), x[r * r:].reshape(U.n, r, r).copy())
           for x in X]
    out.sort(key=point_key)
    return out


# -- orbits ------------------------------------------------------------------------

@dataclass
class OrbitRecord:
    representative: DGModule
    orbit_size: int
    stabilizer_order: int
    tangent_dim: int
    orbit_tangent_dim: int
    members: list[int] = dc_field(default_factory=list)

    @property
    def is_open_candidate(self) -> bool:
        return self.tangent_dim == self.orbit_tangent_dim

    def to_json(self) -> dict:
        m = self.representative
        return {"orbit_size": self.orbit_size, "stabilizer_order": self.stabilizer_order,
                "tangent_dim": self.tangent_dim, "orbit_tangent_dim": self.orbit_tangent_dim,
                "is_open_candidate": self.is_open_candidate,
                "representative": {"d": m.d.tolist(), "act": m.act.tolist()}}


def orbit_decompose(points: list[DGModule], U: DGAlgebra, space: GradedSpace,
                    budget: int = 1 << 16) -> list[OrbitRecord]:
    """Partition points into GL(W)_0-orbits by acting with every group element."""
    F = U.field
    G, Gi = gl_elements(F, space, budget)
    index = {point_key(p): i for i, p in enumerate(points)}
    seen = np.zeros(len(points), dtype=bool)
    order = gl_order(F.size, space.dims)
    if len(G) != order:
        raise AssertionError(f"enumerated {len(G)} group elements, expected {order}")
    out = []
    for i, p in enumerate(points):
        if seen[i]:
            continue
        rows = _act_batch(F, G.astype(np.int64), Gi.astype(np.int64), p.d.astype(np.int64), p.act.astype(np.int64))
        keys = [row.astype(np.int64).tobytes() for row in rows]
        members = sorted({index[k] for k in keys if k in index})
        if len(members) != len(set(keys)):
            raise ValueError("point list is not closed under the group action")
        mine = point_key(p)
        stab = sum(1 for k in keys if k == mine)
        seen[members] = True
        out.append(OrbitRecord(p, len(members), stab, tangent_space(p).dim, orbit_tangent(p).dim, members))
    return out


def isomorphism_between(m1: DGModule, m2: DGModule, budget: int = 1 << 16) -> GLElement | None:
    """A group element alpha with alpha . m1 = m2, found by enumeration."""
    F = m1.field
    space = GradedSpace.from_degrees(m1.degs.tolist())
    if not np.array_equal(m1.degs, space.degrees()):
        raise ValueError("modules must have sorted degrees")
    G, Gi = gl_elements(F, space, budget)
    rows = _act_batch(F, G.astype(np.int64), Gi.astype(np.int64), m1.d.astype(np.int64), m1.act.astype(np.int64))
    target = np.concatenate([m2.d.ravel(), m2.act.ravel()]).astype(np.int64)
    hit = np.flatnonzero(np.all(rows == target[None], axis=1))
    if not len(hit):
        return None
    return GLElement(F, m1.degs.copy(), G[hit[0]])


def open_orbit_check(m: DGModule, bound: int | None = None) -> dict:
    """Tangent dimensions at m next to YExt^1(M, M) and Ext^1(M, M).

    YExt^1 = 0 forces the tangent space down to the orbit tangent, and the
    report flags it if that fails.  Ext^1 from a resolution agrees with
    YExt^1 only for graded-projective M; ``ext_agrees`` records whether it
    did here.
    """
    need = ext_required_bound(m, 1)
    bound = need if bound is None else bound
    e1 = ext_dims(m, m, 1, 1, bound)[1]
    y1 = yext1(m, m).dim
    t, o = tangent_space(m).dim, orbit_tangent(m).dim
    consistent = not (y1 == 0 and t != o)
    return {"ext1": e1, "yext1": y1, "ext_agrees": e1 == y1, "tangent_dim": t, "orbit_tangent_dim": o,
            "equal": t == o, "consistent": consistent, "window": [1, 1], "bound": bound,
            "verdict": "tangent-equal" if t == o else "tangent-larger"}
