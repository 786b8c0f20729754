"""Yoneda Ext^1 of DG modules as explicit linear algebra.

Every extension 0 -> N -> X -> M -> 0 is put in degreewise-split normal form
X = N (+) M with

    d_X = [[d_N, gamma], [0, d_M]],     a.(n, m) = (a n + theta_a m, a m).

The module axioms for X are linear in (gamma, theta):

    d_N gamma + gamma d_M = 0
    gamma a_M + d_N theta_a = theta_{da} + (-1)^|a| (theta_a d_M + a_N gamma)
    theta_{ab} = theta_a b_M + a_N theta_b

A degree-0 map D: M -> N changes the section m -> (0, m) into m -> (D m, m);
the corresponding coboundary is (D d_M - d_N D, D a_M - a_N D), and the
extension splits exactly when (gamma, theta) is such a coboundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iproduct

import numpy as np

from .complexes import _signs, homology_dims
from .linalg import Field, kernel_basis, solve, extend_basis, rank, column_basis, inverse
from .modules import (DGModule, DGModuleMorphism, submodule, quotient_module, truncate_module,
                      hom_dg, check_morphism, validate_module)


class ExtensionError(ValueError):
    pass


@dataclass
class CochainLayout:
    """Coordinates for pairs (gamma, theta) of homogeneous maps M -> N."""

    source: DGModule
    target: DGModule

    def __post_init__(self):
        M, N, U = self.source, self.target, self.source.algebra
        gi, gj = np.nonzero(N.degs[:, None] == M.degs[None, :] - 1)
        self.gpos = (gi, gj)
        ta, ti, tj = np.nonzero(N.degs[None, :, None] == U.degs[:, None, None] + M.degs[None, None, :])
        self.tpos = (ta, ti, tj)
        self.ng = len(gi)
        self.size = len(gi) + len(ta)

    @property
    def field(self) -> Field:
        return self.source.field

    def pack(self, gamma, theta) -> np.ndarray:
        F = self.field
        return F.reduce(np.concatenate([np.asarray(gamma)[self.gpos], np.asarray(theta)[self.tpos]]))

    def unpack(self, vec):
        g, t = self.unpack_batch(np.asarray(vec).reshape(-1, 1))
        return g[0], t[0]

    def unpack_batch(self, V):
        """Columns of V -> arrays gamma (k, N, M) and theta (k, U, N, M)."""
        F = self.field
        M, N, U = self.source, self.target, self.source.algebra
        k = V.shape[1]
        g = F.zeros((k, N.n, M.n))
        t = F.zeros((k, U.n, N.n, M.n))
        if self.ng:
            g[:, self.gpos[0], self.gpos[1]] = V[: self.ng].T
        if self.size > self.ng:
            t[:, self.tpos[0], self.tpos[1], self.tpos[2]] = V[self.ng:].T
        return g, t


def cocycle_residuals(M: DGModule, N: DGModule, g, t) -> np.ndarray:
    """Stacked left-hand sides of the three linear conditions (batched)."""
    U = M.algebra
    F = U.field
    sg = F.array(_signs(U.degs))
    r1 = np.matmul(N.d, g) + np.matmul(g, M.d)
    # theta_{da} = sum_k dU[k, a] theta_k
    tda = np.einsum("ka,...kij->...aij", U.d, t)
    r2 = (np.matmul(g[..., None, :, :], M.act) + np.matmul(N.d, t) - tda
          - sg[:, None, None] * (np.matmul(t, M.d) + np.matmul(N.act, g[..., None, :, :])))
    tab = np.einsum("akb,...kij->...abij", U.mult, t)
    r3 = (tab - np.matmul(t[..., :, None, :, :], M.act[None, :, :, :])
          - np.matmul(N.act[:, None, :, :], t[..., None, :, :, :]))
    k = g.shape[0] if g.ndim == 3 else 1
    parts = [x.reshape(k, -1) for x in (r1, r2, r3)]
    return F.reduce(np.concatenate(parts, axis=1))


@dataclass
class CocycleSystem:
    layout: CochainLayout
    matrix: np.ndarray  # residual = matrix @ vec


def cocycle_system(M: DGModule, N: DGModule) -> CocycleSystem:
    lay = CochainLayout(M, N)
    F = M.field
    if not lay.size:
        return CocycleSystem(lay, F.zeros((0, 0)))
    g, t = lay.unpack_batch(F.eye(lay.size))
    A = cocycle_residuals(M, N, g, t).T
    return CocycleSystem(lay, A[np.any(A != 0, axis=1)])


def degree_zero_positions(M: DGModule, N: DGModule):
    return np.nonzero(N.degs[:, None] == M.degs[None, :])


def coboundary_parts(M: DGModule, N: DGModule, D):
    """(gamma_D, theta_D) for a batch of degree-0 maps D (k, N, M)."""
    F = M.field
    g = F.reduce(np.matmul(D, M.d) - np.matmul(N.d, D))
    t = F.reduce(np.matmul(D[:, None], M.act[None]) - np.matmul(N.act[None], D[:, None]))
    return g, t


def coboundary_matrix(M: DGModule, N: DGModule, lay: CochainLayout | None = None):
    """Columns: packed coboundaries of the elementary degree-0 maps E_ij."""
    F = M.field
    lay = lay or CochainLayout(M, N)
    ri, cj = degree_zero_positions(M, N)
    k = len(ri)
    D = F.zeros((k, N.n, M.n))
    D[np.arange(k), ri, cj] = 1
    if not k or not lay.size:
        return F.zeros((lay.size, k)), (ri, cj)
    g, t = coboundary_parts(M, N, D)
    cols = np.concatenate([g[:, lay.gpos[0], lay.gpos[1]], t[:, lay.tpos[0], lay.tpos[1], lay.tpos[2]]], axis=1)
    return F.reduce(cols.T), (ri, cj)


@dataclass
class ExtensionClass:
    source: DGModule
    target: DGModule
    gamma: np.ndarray
    theta: np.ndarray

    @property
    def field(self) -> Field:
        return self.source.field

    def vector(self, lay: CochainLayout | None = None) -> np.ndarray:
        return (lay or CochainLayout(self.source, self.target)).pack(self.gamma, self.theta)

    @classmethod
    def from_vector(cls, M, N, vec, lay=None):
        lay = lay or CochainLayout(M, N)
        g, t = lay.unpack(vec)
        return cls(M, N, g, t)

    @classmethod
    def zero(cls, M, N):
        F = M.field
        return cls(M, N, F.zeros((N.n, M.n)), F.zeros((M.algebra.n, N.n, M.n)))

    def __add__(self, other: "ExtensionClass") -> "ExtensionClass":
        _check_endpoints(self, other)
        F = self.field
        return ExtensionClass(self.source, self.target, F.reduce(self.gamma + other.gamma),
                              F.reduce(self.theta + other.theta))

    def __neg__(self) -> "ExtensionClass":
        F = self.field
        return ExtensionClass(self.source, self.target, F.reduce(-self.gamma), F.reduce(-self.theta))

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, c) -> "ExtensionClass":
        F = self.field
        c = F.scalar(c)
        return ExtensionClass(self.source, self.target, F.reduce(c * self.gamma), F.reduce(c * self.theta))

    def is_cocycle(self) -> bool:
        r = cocycle_residuals(self.source, self.target, self.gamma[None], self.theta[None])
        return self.field.is_zero(r)

    def assemble(self) -> DGModule:
        return assemble(self)


def _check_endpoints(e1, e2):
    if e1.source is not e2.source or e1.target is not e2.target:
        same = (np.array_equal(e1.source.degs, e2.source.degs) and np.array_equal(e1.target.degs, e2.target.degs)
                and np.array_equal(e1.source.act, e2.source.act) and np.array_equal(e1.target.act, e2.target.act)
                and np.array_equal(e1.source.d, e2.source.d) and np.array_equal(e1.target.d, e2.target.d))
        if not same:
            raise ExtensionError("extensions have different end terms")


def assemble(e: ExtensionClass) -> DGModule:
    """The middle term X on N (+) M (target coordinates first)."""
    M, N = e.source, e.target
    F = M.field
    z = F.zeros((M.n, N.n))
    d = np.block([[N.d, e.gamma], [z, M.d]])
    act = np.stack([np.block([[N.act[a], e.theta[a]], [z, M.act[a]]]) for a in range(M.algebra.n)])
    return DGModule(M.algebra, np.concatenate([N.degs, M.degs]), d, act)


def sequence_maps(e: ExtensionClass):
    """Inclusion N -> X and projection X -> M for the assembled middle term."""
    M, N = e.source, e.target
    F = M.field
    X = assemble(e)
    inc = np.concatenate([F.eye(N.n), F.zeros((M.n, N.n))], axis=0)
    proj = np.concatenate([F.zeros((M.n, N.n)), F.eye(M.n)], axis=1)
    return X, DGModuleMorphism(N, X, inc), DGModuleMorphism(X, M, proj)


@dataclass
class YExt:
    dim: int
    classes: list[ExtensionClass]
    layout: CochainLayout
    cocycles: np.ndarray      # columns
    coboundaries: np.ndarray  # independent columns

    def coordinates(self, e: ExtensionClass):
        """Coordinates of the class of e in the basis ``classes``."""
        F = self.layout.field
        v = e.vector(self.layout)
        reps = np.stack([c.vector(self.layout) for c in self.classes], axis=1) if self.classes else F.zeros((self.layout.size, 0))
        x = solve(F, np.concatenate([self.coboundaries, reps], axis=1), v)
        if x is None:
            raise ExtensionError("not a cocycle")
        return x[self.coboundaries.shape[1]:]


def yext1(M: DGModule, N: DGModule) -> YExt:
    F = M.field
    sys_ = cocycle_system(M, N)
    lay = sys_.layout
    if not lay.size:
        return YExt(0, [], lay, F.zeros((0, 0)), F.zeros((0, 0)))
    Z = kernel_basis(F, sys_.matrix) if sys_.matrix.shape[0] else F.eye(lay.size)
    Bm, _ = coboundary_matrix(M, N, lay)
    B = column_basis(F, Bm) if Bm.size else F.zeros((lay.size, 0))
    keep = extend_basis(F, B, Z)
    classes = [ExtensionClass.from_vector(M, N, Z[:, j], lay) for j in keep]
    return YExt(len(keep), classes, lay, Z, B)


def is_split(e: ExtensionClass):
    """A degree-0 map D with (gamma, theta) = coboundary(D), or None.

    The splitting of the assembled sequence is m -> (D m, m).
    """
    M, N = e.source, e.target
    F = M.field
    lay = CochainLayout(M, N)
    Bm, (ri, cj) = coboundary_matrix(M, N, lay)
    v = lay.pack(e.gamma, e.theta)
    if F.is_zero(v):
        return F.zeros((N.n, M.n))
    if not Bm.shape[1]:
        return None
    x = solve(F, Bm, v)
    if x is None:
        return None
    D = F.zeros((N.n, M.n))
    D[ri, cj] = x
    return D


def splitting_section(e: ExtensionClass, D) -> DGModuleMorphism:
    F = e.field
    X = assemble(e)
    h = np.concatenate([F.reduce(D), F.eye(e.source.n)], axis=0)
    return DGModuleMorphism(e.source, X, h)


def same_class(e1: ExtensionClass, e2: ExtensionClass) -> bool:
    return is_split(e1 - e2) is not None


# -- normal forms of arbitrary short exact sequences -----------------------------

def _homogeneous_solve(F: Field, g, src_degs, tgt_degs):
    """Degree-0 right inverse s of a surjective homogeneous map g (g s = 1)."""
    s = F.zeros((len(src_degs), len(tgt_degs)))
    for deg in np.unique(tgt_degs):
        ti = np.flatnonzero(tgt_degs == deg)
        si = np.flatnonzero(src_degs == deg)
        x = solve(F, g[np.ix_(ti, si)], F.eye(len(ti))) if len(si) else None
        if x is None:
            raise ExtensionError(f"map is not surjective in degree {deg}")
        s[np.ix_(si, ti)] = x
    return s


def normalize_sequence(X: DGModule, f: np.ndarray, g: np.ndarray, N: DGModule, M: DGModule) -> ExtensionClass:
    """Normal form of the exact sequence N -f-> X -g-> M."""
    F = X.field
    sigma = _homogeneous_solve(F, g, X.degs, M.degs)
    Phi = np.concatenate([F.reduce(f), sigma], axis=1)
    try:
        Pinv = inverse(F, Phi)
    except ZeroDivisionError:
        raise ExtensionError("sequence is not exact") from None
    d = F.matmul(Pinv, F.matmul(X.d, Phi))
    act = np.stack([F.matmul(Pinv, F.matmul(X.act[a], Phi)) for a in range(X.algebra.n)])
    n = N.n
    if not (F.is_zero(F.reduce(d[:n, :n] - N.d)) and F.is_zero(F.reduce(d[n:, n:] - M.d)) and F.is_zero(d[n:, :n])):
        raise ExtensionError("maps are not compatible with differentials")
    for a in range(X.algebra.n):
        if not (F.is_zero(F.reduce(act[a][:n, :n] - N.act[a])) and F.is_zero(F.reduce(act[a][n:, n:] - M.act[a]))
                and F.is_zero(act[a][n:, :n])):
            raise ExtensionError("maps are not linear")
    return ExtensionClass(M, N, d[:n, n:].copy(), act[:, :n, n:].copy())


def _homogeneous_kernel(F: Field, mat, src_degs, tgt_degs):
    cols = []
    for deg in np.unique(src_degs):
        si = np.flatnonzero(src_degs == deg)
        ti = np.flatnonzero(tgt_degs == deg)
        K = kernel_basis(F, mat[np.ix_(ti, si)]) if len(ti) else F.eye(len(si))
        full = F.zeros((len(src_degs), K.shape[1]))
        full[si] = K
        cols.append(full)
    return np.concatenate(cols, axis=1) if cols else F.zeros((len(src_degs), 0))


@dataclass
class BaerSum:
    categorical: ExtensionClass
    coordinate: ExtensionClass
    agree: bool


def baer_sum(e1: ExtensionClass, e2: ExtensionClass) -> BaerSum:
    """Pullback over M, then cokernel of the antidiagonal copy of N."""
    _check_endpoints(e1, e2)
    M, N = e1.source, e1.target
    F = M.field
    X1, X2 = assemble(e1), assemble(e2)
    nn, nm = N.n, M.n
    # L = {(x1, x2) : pi x1 = pi x2} with basis (n1, n2, m)
    V = F.zeros((2 * (nn + nm), 2 * nn + nm))
    V[:nn, :nn] = F.eye(nn)
    V[nn + nm:2 * nn + nm, nn:2 * nn] = F.eye(nn)
    V[nn:nn + nm, 2 * nn:] = F.eye(nm)
    V[2 * nn + nm:, 2 * nn:] = F.eye(nm)
    from .modules import direct_sum_modules
    L, _ = submodule(direct_sum_modules(X1, X2), V)
    # antidiagonal n -> (-n, n), in L coordinates (n1, n2, m)
    anti = np.concatenate([F.reduce(-F.eye(nn)), F.eye(nn), F.zeros((nm, nn))], axis=0)
    T, P, S = quotient_module(L, anti)
    f = F.matmul(P, np.concatenate([F.eye(nn), F.zeros((nn + nm, nn))], axis=0))
    # projection T -> M: lift to L via the section, then read off m
    g = F.matmul(np.concatenate([F.zeros((nm, 2 * nn)), F.eye(nm)], axis=1), S)
    cat = normalize_sequence(T, f, g, N, M)
    coord = e1 + e2
    return BaerSum(cat, coord, same_class(cat, coord))


# -- graded-free sources -------------------------------------------------------

@dataclass
class PsiResult:
    lam: np.ndarray          # degree -1 A-linear cycle M -> N
    coboundary: np.ndarray   # D with (gamma, theta) - coboundary(D) = (lam, 0)


def _is_graded_free(M: DGModule) -> bool:
    return M.semibasis is not None


def psi(e: ExtensionClass) -> PsiResult:
    """Normalize e to theta = 0; the remaining gamma is an A-linear cycle."""
    M, N = e.source, e.target
    F = M.field
    if not _is_graded_free(M):
        raise ExtensionError("source is not recognised as graded-projective")
    ri, cj = degree_zero_positions(M, N)
    k = len(ri)
    D = F.zeros((k, N.n, M.n))
    D[np.arange(k), ri, cj] = 1
    if k:
        _, t = coboundary_parts(M, N, D)
        x = solve(F, t.reshape(k, -1).T, e.theta.reshape(-1))
    else:
        x = F.zeros(0) if F.is_zero(e.theta) else None
    if x is None:
        raise ExtensionError("action perturbation cannot be removed; source is not graded-projective")
    Dx = F.zeros((N.n, M.n))
    Dx[ri, cj] = x
    gD, tD = coboundary_parts(M, N, Dx[None])
    lam = F.reduce(e.gamma - gD[0])
    _check_lambda(M, N, lam)
    return PsiResult(lam, Dx)


def _check_lambda(M, N, lam):
    F = M.field
    U = M.algebra
    r, c = np.nonzero(lam != 0)
    if np.any(N.degs[r] != M.degs[c] - 1):
        raise ExtensionError("map is not of degree -1")
    if not F.is_zero(F.reduce(F.matmul(N.d, lam) + F.matmul(lam, M.d))):
        raise ExtensionError("map is not a cycle")
    for a in range(U.n):
        s = -1 if U.degs[a] % 2 else 1
        if not F.is_zero(F.reduce(F.matmul(lam, M.act[a]) - s * F.matmul(N.act[a], lam))):
            raise ExtensionError(f"map is not A-linear (fails for e_{a})")


def psi_inverse(M: DGModule, N: DGModule, lam) -> ExtensionClass:
    F = M.field
    lam = F.reduce(np.asarray(lam))
    _check_lambda(M, N, lam)
    return ExtensionClass(M, N, lam, F.zeros((M.algebra.n, N.n, M.n)))


def hom_boundary_membership(M: DGModule, N: DGModule, lam) -> bool:
    """Is lam = d(D) for an A-linear degree-0 D (i.e. zero in H_{-1} Hom_A)?"""
    F = M.field
    H = hom_dg(M, N)
    c = H.coords(lam)
    if c is None:
        raise ExtensionError("map is not in Hom_A")
    src = H.complex.idx(0)
    tgt = H.complex.idx(-1)
    img = H.complex.d[np.ix_(tgt, src)]
    return solve(F, img, c[tgt]) is not None if len(src) else F.is_zero(c)


# -- truncations -----------------------------------------------------------------

def truncation_map(e: ExtensionClass, M: DGModule, n: int) -> ExtensionClass:
    """Pull an extension of tau(M)_{<=n} by N back along M -> tau(M)_{<=n}.

    Computed categorically (pullback submodule, then normal form) and
    compared with the composite (gamma pi, theta pi).
    """
    N = e.target
    F = M.field
    if N.n and N.degs.max() > n:
        raise ExtensionError(f"target is nonzero above degree {n}")
    tM, pi = truncate_module(M, n)
    if tM.n != e.source.n or not np.array_equal(tM.degs, e.source.degs):
        raise ExtensionError("extension source is not the truncation of M")
    X = assemble(e)
    nn = N.n
    g = np.concatenate([F.zeros((tM.n, nn)), F.eye(tM.n)], axis=1)
    big = np.concatenate([g, F.reduce(-pi.f)], axis=1)
    src_degs = np.concatenate([X.degs, M.degs])
    V = _homogeneous_kernel(F, big, src_degs, tM.degs)
    from .modules import direct_sum_modules
    L, V = submodule(direct_sum_modules(X, M), V)
    # N -> L : n -> ((n, 0), 0);  L -> M : (x, m) -> m
    incl = np.concatenate([F.eye(nn), F.zeros((tM.n + M.n, nn))], axis=0)
    f = solve(F, V, incl)
    proj = F.matmul(np.concatenate([F.zeros((M.n, X.n)), F.eye(M.n)], axis=1), V)
    pulled = normalize_sequence(L, f, proj, N, M)
    shortcut = ExtensionClass(M, N, F.matmul(e.gamma, pi.f),
                              F.reduce(np.matmul(e.theta, pi.f)))
    if not same_class(pulled, shortcut):
        raise AssertionError("pullback disagrees with composite")
    return pulled


def ext1_vanishing_transfer(C: DGModule, n: int) -> dict:
    h = {i: v for i, v in homology_dims(C.complex).items() if v}
    sup = max(h) if h else None
    if sup is not None and n < sup:
        raise ExtensionError(f"need n >= sup(C) = {sup}")
    tC, _ = truncate_module(C, n)
    a = yext1(C, C).dim
    b = yext1(tC, tC).dim
    return {"yext1_C": a, "yext1_truncation": b, "ok": a == 0 and b == 0, "n": n}


def enumerate_classes(Y: YExt):
    """Every class of YExt^1 over a finite field, as representatives."""
    F = Y.layout.field
    for coeffs in iproduct(range(F.size), repeat=Y.dim):
        v = F.zeros(Y.layout.size)
        for c, e in zip(coeffs, Y.classes):
            v = F.reduce(v + c * e.vector(Y.layout))
        yield coeffs, ExtensionClass.from_vector(Y.layout.source, Y.layout.target, v, Y.layout)
