"""DG modules over a finite-dimensional DG algebra, stored as points (d, act).

``act[a]`` is the matrix of the action of algebra basis element ``a`` on the
module's global basis; ``d`` is the module differential.  Degrees may be
negative.  A module built as a direct sum of shifted copies of the algebra
carries its semibasis in ``semibasis`` (columns), which the extension code
uses to recognise graded-free sources.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import DGAlgebra, AlgebraMorphism, LocalData, is_local
from .complexes import Complex, Report, hom_positions, _signs, tensor_complex, validate_complex
from .linalg import Field, kernel_basis, solve, extend_basis, block_diag, rank


@dataclass
class DGModule:
    algebra: DGAlgebra
    degs: np.ndarray
    d: np.ndarray
    act: np.ndarray
    semibasis: np.ndarray | None = None

    def __post_init__(self):
        F = self.algebra.field
        self.degs = np.asarray(self.degs, dtype=np.int64).reshape(-1)
        r, n = len(self.degs), self.algebra.n
        self.d = F.reduce(np.asarray(self.d).reshape(r, r)) if r else F.zeros((0, 0))
        self.act = F.reduce(np.asarray(self.act).reshape(n, r, r)) if r else F.zeros((n, 0, 0))

    @property
    def field(self) -> Field:
        return self.algebra.field

    @property
    def n(self) -> int:
        return len(self.degs)

    @property
    def complex(self) -> Complex:
        return Complex(self.field, self.degs, self.d)

    def idx(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.degs == i)

    def dim(self, i: int) -> int:
        return int(np.count_nonzero(self.degs == i))

    def degree_range(self) -> range:
        return self.complex.degree_range()

    @property
    def bottom(self) -> int:
        return int(self.degs.min()) if self.n else 0

    @property
    def top(self) -> int:
        return int(self.degs.max()) if self.n else 0

    def acting(self, x) -> np.ndarray:
        """Matrix of the action of the algebra element with coordinates x."""
        return self.field.reduce(np.tensordot(np.asarray(x), self.act, axes=1))

    def permuted(self, order) -> "DGModule":
        o = np.asarray(order, dtype=np.int64)
        sb = None
        if self.semibasis is not None:
            sb = self.semibasis[o]
        return DGModule(self.algebra, self.degs[o], self.d[np.ix_(o, o)], self.act[:, o][:, :, o], sb)

    def sorted(self) -> "DGModule":
        return self.permuted(np.argsort(self.degs, kind="stable"))


@dataclass
class DGModuleMorphism:
    source: DGModule
    target: DGModule
    f: np.ndarray  # target.n x source.n


# -- axioms -----------------------------------------------------------------

def axiom_terms(U: DGAlgebra, dP, aP, dQ, aQ, aL=None, const=True) -> dict[str, np.ndarray]:
    """Residuals of the module axioms, split as bilinear(P, Q) + linear(L).

    With P = Q = L = (d, act) and ``const`` these are the defining equations
    of a DG module; they vanish exactly on valid points.  Leading batch axes
    on the arrays are allowed.  Used by validation and by the tangent
    computation (derivative = terms(M, v) + terms(v, M) + linear(v)).
    """
    F = U.field
    r = dP.shape[-1] if dP is not None else dQ.shape[-1]
    sg = F.array(_signs(U.degs))
    out = {}
    out["d^2"] = np.matmul(dP, dQ)
    assoc = np.matmul(aP[..., :, None, :, :], aQ[..., None, :, :, :])
    leib = np.matmul(dP[..., None, :, :], aQ) - sg[:, None, None] * np.matmul(aP, dQ[..., None, :, :])
    unit = np.zeros_like(out["d^2"])
    if aL is not None:
        assoc = assoc - np.einsum("akb,...kij->...abij", U.mult, aL)
        leib = leib - np.einsum("ka,...kij->...aij", U.d, aL)
        unit = unit + np.einsum("a,...aij->...ij", U.unit, aL)
    if const:
        unit = unit - F.eye(r)
    out["unit"] = unit
    out["assoc"] = assoc
    out["leibniz"] = leib
    return {k: F.reduce(v) for k, v in out.items()}


def validate_module(m: DGModule) -> Report:
    U, F = m.algebra, m.field
    rep = validate_complex(m.complex)
    r = m.n
    if m.act.shape != (U.n, r, r):
        rep.fail(f"action tensor has shape {m.act.shape}, expected {(U.n, r, r)}")
        return rep
    a, i, w = np.nonzero(m.act != 0)
    bad = m.degs[i] != U.degs[a] + m.degs[w]
    for x, y, z in list(zip(a[bad], w[bad], i[bad]))[:5]:
        rep.fail(f"action of e_{x} on w_{y} has a component on w_{z} of the wrong degree")
    t = axiom_terms(U, m.d, m.act, m.d, m.act, m.act)
    if not F.is_zero(t["unit"]):
        rep.fail("unit does not act as the identity")
    for x, y in zip(*np.nonzero(np.any(t["assoc"] != 0, axis=(2, 3)))):
        rep.fail(f"associativity fails: (e_{x} e_{y}) w != e_{x} (e_{y} w)")
    for x in np.flatnonzero(np.any(t["leibniz"] != 0, axis=(1, 2))):
        rep.fail(f"Leibniz rule fails for e_{x}")
    return rep


def check_morphism(phi: DGModuleMorphism, degree: int = 0) -> Report:
    S, T, f = phi.source, phi.target, phi.f
    F = S.field
    rep = Report()
    f = F.reduce(f)
    r, c = np.nonzero(f != 0)
    if np.any(T.degs[r] != S.degs[c] + degree):
        rep.fail("map is not homogeneous of the stated degree")
    sgn = -1 if degree % 2 else 1
    if not F.is_zero(F.reduce(F.matmul(T.d, f) - sgn * F.matmul(f, S.d))):
        rep.fail("map does not commute with differentials")
    for a in range(S.algebra.n):
        s = -1 if (degree * S.algebra.degs[a]) % 2 else 1
        if not F.is_zero(F.reduce(F.matmul(f, S.act[a]) - s * F.matmul(T.act[a], f))):
            rep.fail(f"map is not linear for e_{a}")
    return rep


# -- constructions ------------------------------------------------------------

def regular_module(U: DGAlgebra) -> DGModule:
    sb = U.unit.reshape(-1, 1)
    return DGModule(U, U.degs.copy(), U.d.copy(), U.mult.copy(), sb)


def zero_module(U: DGAlgebra) -> DGModule:
    F = U.field
    return DGModule(U, np.zeros(0, dtype=np.int64), F.zeros((0, 0)), F.zeros((U.n, 0, 0)), F.zeros((0, 0)))


def shift_module(m: DGModule, i: int) -> DGModule:
    F = m.field
    s = -1 if i % 2 else 1
    asg = F.array(np.where((i * m.algebra.degs) % 2 == 0, 1, -1))
    return DGModule(m.algebra, m.degs + i, F.reduce(s * m.d), F.reduce(asg[:, None, None] * m.act), m.semibasis)


def direct_sum_modules(*mods: DGModule) -> DGModule:
    U = mods[0].algebra
    F = U.field
    degs = np.concatenate([x.degs for x in mods]) if mods else np.zeros(0, dtype=np.int64)
    d = block_diag(F, *[x.d for x in mods])
    act = np.stack([block_diag(F, *[x.act[a] for x in mods]) for a in range(U.n)]) if U.n else None
    sb = None
    if all(x.semibasis is not None for x in mods):
        sb = block_diag(F, *[x.semibasis for x in mods])
    return DGModule(U, degs, d, act, sb)


def free_module(U: DGAlgebra, shifts) -> DGModule:
    """Direct sum of shifted copies of U, one per entry of ``shifts``."""
    shifts = list(shifts)
    if not shifts:
        return zero_module(U)
    return direct_sum_modules(*[shift_module(regular_module(U), s) for s in shifts])


def residue_module(U: DGAlgebra, local: LocalData | None = None) -> DGModule:
    """The residue field k in degree 0 (m_U acts by zero)."""
    local = local or is_local(U)
    if local is None:
        raise ValueError("algebra is not local")
    F = U.field
    act = F.reduce(local.residue.reshape(U.n, 1, 1))
    return DGModule(U, [0], F.zeros((1, 1)), act)


def linear_dual(m: DGModule) -> DGModule:
    """Hom_F(M, F) with (a f)(x) = (-1)^{|a||f|} f(a x).

    The dual basis vector of w_j has degree -|w_j|.
    """
    F = m.field
    fdeg = -m.degs
    s = _signs(fdeg)
    d = F.reduce(-(m.d.T * s[None, :]))
    U = m.algebra
    act = F.zeros((U.n, m.n, m.n))
    for a in range(U.n):
        sa = np.where((U.degs[a] * fdeg) % 2 == 0, 1, -1)
        act[a] = F.reduce(m.act[a].T * sa[None, :])
    return DGModule(U, fdeg, d, act)


def restrict_scalars(phi: AlgebraMorphism, m: DGModule) -> DGModule:
    """A module over phi.target viewed over phi.source."""
    F = m.field
    act = F.reduce(np.tensordot(phi.f.T, m.act, axes=1))
    return DGModule(phi.source, m.degs.copy(), m.d.copy(), act)


def submodule(m: DGModule, V) -> tuple[DGModule, np.ndarray]:
    """DG submodule spanned by the (independent) columns of V, plus inclusion."""
    F = m.field
    V = F.reduce(V)
    k = V.shape[1]
    degs = np.zeros(k, dtype=np.int64)
    for j in range(k):
        ds = set(m.degs[np.flatnonzero(V[:, j] != 0)].tolist())
        if len(ds) > 1:
            raise ValueError("spanning vectors must be homogeneous")
        degs[j] = ds.pop() if ds else 0
    d = solve(F, V, F.matmul(m.d, V)) if k else F.zeros((0, 0))
    if d is None:
        raise ValueError("subspace is not closed under the differential")
    act = F.zeros((m.algebra.n, k, k))
    for a in range(m.algebra.n):
        x = solve(F, V, F.matmul(m.act[a], V)) if k else F.zeros((0, 0))
        if x is None:
            raise ValueError(f"subspace is not closed under the action of e_{a}")
        act[a] = x
    return DGModule(m.algebra, degs, d, act), V


def quotient_module(m: DGModule, V) -> tuple[DGModule, np.ndarray, np.ndarray]:
    """Quotient by the DG submodule spanned by columns of V.

    Returns (Q, projection, section); the quotient basis is the set of
    standard basis vectors of M outside span(V), chosen greedily.
    """
    F = m.field
    V = F.reduce(np.asarray(V).reshape(m.n, -1))
    E = F.eye(m.n)
    keep = extend_basis(F, V, E)
    S = E[:, keep]
    if m.n:
        coords = solve(F, np.concatenate([V, S], axis=1), E)
        P = coords[V.shape[1]:, :]
    else:
        P = F.zeros((0, 0))
    # closure: d V and a V must project to zero
    for name, op in [("differential", m.d)] + [(f"action of e_{a}", m.act[a]) for a in range(m.algebra.n)]:
        if V.size and not F.is_zero(F.matmul(P, F.matmul(op, V))):
            raise ValueError(f"subspace not closed under the {name}")
    d = F.matmul(P, F.matmul(m.d, S))
    act = np.stack([F.matmul(P, F.matmul(m.act[a], S)) for a in range(m.algebra.n)]) if m.algebra.n else None
    return DGModule(m.algebra, m.degs[keep], d, act), P, S


def truncate_module(m: DGModule, n: int) -> tuple[DGModule, DGModuleMorphism]:
    """Soft left truncation: degree n becomes M_n / Im d_{n+1}, higher degrees vanish."""
    F = m.field
    above = np.flatnonzero(m.degs > n)
    V = np.concatenate([F.eye(m.n)[:, above], m.d[:, m.idx(n + 1)]], axis=1)
    try:
        q, P, _ = quotient_module(m, V)
    except ValueError as exc:  # cannot happen for valid modules
        raise AssertionError(f"action does not descend to the truncation: {exc}") from None
    return q, DGModuleMorphism(m, q, P)


# -- Hom and tensor -------------------------------------------------------------

@dataclass
class HomDG:
    """Hom_A(M, N) as a complex; ``embed`` maps coordinates to row-major vec(f)."""

    complex: Complex
    embed: np.ndarray
    shape: tuple[int, int]

    def matrix(self, coords) -> np.ndarray:
        return self.complex.field.matmul(self.embed, coords).reshape(self.shape)

    def coords(self, f):
        return solve(self.complex.field, self.embed, np.asarray(f).reshape(-1))


def _linearity_constraints(m: DGModule, n: DGModule, rows, cols, deg: int) -> np.ndarray:
    """Stacked residuals f act_M[a] - (-1)^{deg|a|} act_N[a] f for f = E_rc."""
    F = m.field
    U = m.algebra
    k = len(rows)
    blocks = []
    for a in range(U.n):
        if F.is_zero(m.act[a]) and F.is_zero(n.act[a]):
            continue
        s = -1 if (deg * U.degs[a]) % 2 else 1
        A, B = m.act[a], n.act[a]
        M1 = F.zeros((n.n, m.n, k))
        M1[rows, :, np.arange(k)] = A[cols, :]
        M2 = F.zeros((n.n, m.n, k))
        M2[:, cols, np.arange(k)] = B[:, rows]
        blocks.append(F.reduce(M1 - s * M2).reshape(n.n * m.n, k))
    if not blocks:
        return F.zeros((0, k))
    C = np.concatenate(blocks, axis=0)
    return C[np.any(C != 0, axis=1)]


def hom_dg(m: DGModule, n: DGModule) -> HomDG:
    F = m.field
    rows, cols, pdeg = hom_positions(m.degs, n.degs)
    nm = m.n
    bases, degs = [], []
    if m.n and n.n:
        for deg in range(int(n.degs.min() - m.degs.max()), int(n.degs.max() - m.degs.min()) + 1):
            sel = np.flatnonzero(pdeg == deg)
            if not len(sel):
                continue
            C = _linearity_constraints(m, n, rows[sel], cols[sel], deg)
            K = kernel_basis(F, C) if C.shape[0] else F.eye(len(sel))
            if not K.shape[1]:
                continue
            full = F.zeros((n.n * nm, K.shape[1]))
            full[rows[sel] * nm + cols[sel]] = K
            bases.append(full)
            degs += [deg] * K.shape[1]
    embed = np.concatenate(bases, axis=1) if bases else F.zeros((n.n * nm, 0))
    k = embed.shape[1]
    dm = F.zeros((k, k))
    degs_arr = np.array(degs, dtype=np.int64)
    for j in range(k):
        f = embed[:, j].reshape(n.n, nm)
        s = -1 if degs[j] % 2 else 1
        g = F.reduce(F.matmul(n.d, f) - s * F.matmul(f, m.d)).reshape(-1)
        if F.is_zero(g):
            continue
        tgt = np.flatnonzero(degs_arr == degs[j] - 1)
        x = solve(F, embed[:, tgt], g)
        if x is None:
            raise AssertionError("Hom_A is not closed under the differential")
        dm[tgt, j] = x
    return HomDG(Complex(F, degs_arr, dm), embed, (n.n, nm))


@dataclass
class TensorDG:
    """M (x)_A N as a quotient of M (x)_F N (basis index ``i * N.n + j``).

    ``section`` lifts quotient coordinates to the full tensor product and
    ``proj`` maps the full tensor product onto quotient coordinates.
    """

    complex: Complex
    proj: np.ndarray
    section: np.ndarray


def tensor_over_A(m: DGModule, n: DGModule) -> TensorDG:
    F = m.field
    U = m.algebra
    full = tensor_complex(m.complex, n.complex)
    N = full.n
    rels = []
    for a in range(U.n):
        if F.is_zero(m.act[a]) and F.is_zero(n.act[a]):
            continue
        s = F.array(np.diag(np.where((U.degs[a] * m.degs) % 2 == 0, 1, -1)))
        R = np.kron(m.act[a], F.eye(n.n)) - np.kron(s, n.act[a])
        rels.append(F.reduce(R))
    Rel = np.concatenate(rels, axis=1) if rels else F.zeros((N, 0))
    Rel = Rel[:, np.any(Rel != 0, axis=0)]
    # relations are homogeneous, so work one degree at a time
    parts = []
    for deg in full.degree_range():
        ix = full.idx(deg)
        if not len(ix):
            continue
        cols = np.flatnonzero(np.any(Rel[ix] != 0, axis=0))
        Rd = Rel[np.ix_(ix, cols)]
        Ed = F.eye(len(ix))
        kd = extend_basis(F, Rd, Ed)
        coords = solve(F, np.concatenate([Rd, Ed[:, kd]], axis=1), Ed)
        Pd = coords[Rd.shape[1]:, :]
        parts.append((ix, kd, Pd))
    q = sum(len(kd) for _, kd, _ in parts)
    P = F.zeros((q, N))
    S = F.zeros((N, q))
    qdegs = np.zeros(q, dtype=np.int64)
    o = 0
    for ix, kd, Pd in parts:
        P[o:o + len(kd), ix] = Pd
        S[ix[kd], np.arange(o, o + len(kd))] = 1
        qdegs[o:o + len(kd)] = full.degs[ix[0]]
        o += len(kd)
    d = F.matmul(P, F.matmul(full.d, S))
    return TensorDG(Complex(F, qdegs, d), P, S)


def base_change(phi: AlgebraMorphism, m: DGModule) -> DGModule:
    """B (x)_A M with b (b' (x) m) = (b b') (x) m."""
    B = phi.target
    F = m.field
    b_over_a = restrict_scalars(phi, regular_module(B))
    t = tensor_over_A(b_over_a, m)
    act = np.stack([F.matmul(t.proj, F.matmul(np.kron(B.mult[b], F.eye(m.n)), t.section)) for b in range(B.n)])
    return DGModule(B, t.complex.degs, t.complex.d, act)


def homothety(m: DGModule, hom: HomDG | None = None) -> tuple[HomDG, np.ndarray]:
    """Matrix of a -> (x -> a x) from U into the coordinates of Hom_A(M, M)."""
    F = m.field
    hom = hom or hom_dg(m, m)
    U = m.algebra
    chi = F.zeros((hom.embed.shape[1], U.n))
    for a in range(U.n):
        x = hom.coords(m.act[a])
        if x is None:
            raise AssertionError(f"multiplication by e_{a} is not A-linear")
        chi[:, a] = x
    return hom, chi
