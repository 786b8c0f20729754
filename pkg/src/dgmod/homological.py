"""Semi-free resolutions truncated at a degree bound, Ext, Tor, Betti/Bass numbers.

A resolution F of M is stored by its semibasis: generator g has degree
``gdeg[g]``, boundary ``dgen[g]`` (coordinates in F) and augmentation image
``eps[g]`` (coordinates in M).  F has basis ``u_b e_g`` at index ``g*n + b``
(n = dim U), of degree ``gdeg[g] + |u_b|``, with

    a (u e) = (a u) e,      d(u e) = d(u) e + (-1)^|u| u d(e).

Generators are added degree by degree by killing the homology of the mapping
cone of F -> M, with cone differential (m, f) -> (dm + eps(f), -df).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .algebra import DGAlgebra, is_local, LocalData
from .complexes import Complex, homology_dims, induced_rank, _signs
from .linalg import Field, kernel_basis, extend_basis, rank
from .modules import DGModule, DGModuleMorphism, residue_module


class BoundError(ValueError):
    """The truncation bound is too small for the requested window."""


@dataclass
class LaurentPolynomial:
    """Coefficients c_i for lo <= i <= hi (a window of a formal series)."""

    lo: int
    hi: int
    coeffs: list[int]

    def __getitem__(self, i: int) -> int:
        if not self.lo <= i <= self.hi:
            raise KeyError(f"degree {i} outside window [{self.lo}, {self.hi}]")
        return self.coeffs[i - self.lo]

    def to_dict(self) -> dict[str, int]:
        return {str(self.lo + k): c for k, c in enumerate(self.coeffs)}

    @classmethod
    def from_dict(cls, data: dict[int, int], lo: int, hi: int) -> "LaurentPolynomial":
        return cls(lo, hi, [int(data.get(i, 0)) for i in range(lo, hi + 1)])


class SemifreeResolution:
    """Semi-free resolution of ``target`` built up to an explicit degree bound."""

    def __init__(self, target: DGModule, minimal: bool = True):
        U = target.algebra
        self.target = target
        self.algebra = U
        self.field = U.field
        self.minimal = minimal
        self.local: LocalData | None = None
        if minimal:
            self.local = is_local(U)
            if self.local is None:
                raise ValueError("minimal resolutions need a local algebra")
        self.gdeg: list[int] = []
        self.dgen: list[np.ndarray] = []
        self.eps: list[np.ndarray] = []
        self.bound = target.bottom - 1
        self.stages: list[tuple[int, int]] = []  # (degree, number of generators added)
        self._dcache: dict[int, np.ndarray] = {}
        self._ecache: dict[int, np.ndarray] = {}

    # -- shape of F -------------------------------------------------------------
    @property
    def ngens(self) -> int:
        return len(self.gdeg)

    @property
    def size(self) -> int:
        return self.ngens * self.algebra.n

    def fdegs(self) -> np.ndarray:
        U = self.algebra
        if not self.ngens:
            return np.zeros(0, dtype=np.int64)
        return (np.asarray(self.gdeg)[:, None] + U.degs[None, :]).reshape(-1)

    def gen_vector(self, g: int) -> np.ndarray:
        v = self.field.zeros(self.size)
        v[g * self.algebra.n:(g + 1) * self.algebra.n] = self.algebra.unit
        return v

    def _pad(self, v: np.ndarray, size: int | None = None) -> np.ndarray:
        out = self.field.zeros(self.size if size is None else size)
        out[: len(v)] = v[: len(out)]
        return out

    def _d_gen(self, g: int) -> np.ndarray:
        """Rows 0..(g+1)n of d on the span of u_b e_g (columns b)."""
        F, U = self.field, self.algebra
        n = U.n
        if g not in self._dcache:
            z = self.dgen[g].reshape(-1, n)
            sg = F.array(_signs(U.degs))
            out = F.zeros(((g + 1) * n, n))
            for h in np.flatnonzero(np.any(z != 0, axis=1)):
                # column b: (-1)^|b| u_b * (component of d e_g on generator h)
                out[h * n:(h + 1) * n] = F.reduce(np.einsum("bkc,c->kb", U.mult, z[h]) * sg[None, :])
            out[g * n:] = F.reduce(out[g * n:] + U.d)
            self._dcache[g] = out
        return self._dcache[g]

    def _eps_gen(self, g: int) -> np.ndarray:
        if g not in self._ecache:
            self._ecache[g] = self.field.reduce(np.einsum("bij,j->ib", self.target.act, self.eps[g]))
        return self._ecache[g]

    def _blocks(self, rows, cols, per_gen) -> np.ndarray:
        """Assemble rows x cols of an operator given per-generator column blocks."""
        F, n = self.field, self.algebra.n
        cols = np.asarray(cols, dtype=np.int64)
        out = F.zeros((len(rows), len(cols)))
        if not len(cols) or not len(rows):
            return out
        g_of, b_of = cols // n, cols % n
        for g in np.unique(g_of):
            sel = np.flatnonzero(g_of == g)
            blk = per_gen(int(g))
            keep = np.flatnonzero(rows < blk.shape[0])
            out[np.ix_(keep, sel)] = blk[np.ix_(rows[keep], b_of[sel])]
        return out

    def d_block(self, rows, cols) -> np.ndarray:
        return self._blocks(np.asarray(rows, dtype=np.int64), cols, self._d_gen)

    def eps_block(self, rows, cols) -> np.ndarray:
        return self._blocks(np.asarray(rows, dtype=np.int64), cols, self._eps_gen)

    def act_block(self, x, rows, cols) -> np.ndarray:
        """Action of the algebra element x restricted to rows x cols of F."""
        F, U = self.field, self.algebra
        L = U.left(x)
        n = U.n

        def per_gen(g):
            out = F.zeros(((g + 1) * n, n))
            out[g * n:] = L
            return out
        return self._blocks(np.asarray(rows, dtype=np.int64), cols, per_gen)

    def differential(self) -> np.ndarray:
        """Global matrix of d on F."""
        allix = np.arange(self.size)
        return self.d_block(allix, allix)

    def augmentation(self) -> np.ndarray:
        """Matrix of eps: F -> M (target.n x size)."""
        return self.eps_block(np.arange(self.target.n), np.arange(self.size))

    def action(self) -> np.ndarray:
        F, U = self.field, self.algebra
        I = F.eye(self.ngens)
        return F.reduce(np.stack([np.kron(I, U.mult[a]) for a in range(U.n)]))

    @property
    def total(self) -> DGModule:
        return DGModule(self.algebra, self.fdegs(), self.differential(), self.action(),
                        semibasis=np.stack([self.gen_vector(g) for g in range(self.ngens)], axis=1)
                        if self.ngens else self.field.zeros((0, 0)))

    @property
    def comparison(self) -> DGModuleMorphism:
        return DGModuleMorphism(self.total, self.target, self.augmentation())

    # -- construction ---------------------------------------------------------------
    def extend_to(self, bound: int) -> "SemifreeResolution":
        if bound < self.target.bottom and self.target.n:
            h = homology_dims(self.target.complex)
            lo = min((i for i, v in h.items() if v), default=None)
            if lo is not None and bound < lo:
                raise BoundError(f"bound {bound} is below inf(M) = {lo}")
        while self.bound < bound:
            self._step(self.bound + 1)
            self.bound += 1
        return self

    def _step(self, n: int):
        F, U, M = self.field, self.algebra, self.target
        fd = self.fdegs()
        Mn, Mn1, Mp1 = M.idx(n), M.idx(n - 1), M.idx(n + 1)
        Fn1, Fn2, Fn = (np.flatnonzero(fd == k) for k in (n - 1, n - 2, n))
        # cone cycles in degree n: pairs (m, z) in M_n + F_{n-1}
        top = np.concatenate([F.zeros((len(Fn2), len(Mn))), self.d_block(Fn2, Fn1)], axis=1)
        bot = np.concatenate([M.d[np.ix_(Mn1, Mn)], self.eps_block(Mn1, Fn1)], axis=1)
        S = kernel_basis(F, np.concatenate([top, bot], axis=0))
        if not S.shape[1]:
            self.stages.append((n, 0))
            return
        # cone boundaries: (dm', 0) and (eps f, -df) for f in the current F_n
        B1 = np.concatenate([M.d[np.ix_(Mn, Mp1)], F.zeros((len(Fn1), len(Mp1)))], axis=0)
        B2 = np.concatenate([self.eps_block(Mn, Fn), F.reduce(-self.d_block(Fn1, Fn))], axis=0)
        sub = [B1, B2]
        if self.minimal:
            m0 = self.local.max_ideal
            for j in range(m0.shape[1]):
                x = m0[:, j]
                am = F.reduce(np.tensordot(x, M.act, axes=1))[np.ix_(Mn, Mn)]
                af = self.act_block(x, Fn1, Fn1)
                op = np.concatenate([np.concatenate([am, F.zeros((len(Mn), len(Fn1)))], axis=1),
                                     np.concatenate([F.zeros((len(Fn1), len(Mn))), af], axis=1)], axis=0)
                sub.append(F.matmul(op, S))
        Sub = np.concatenate(sub, axis=1)
        new = extend_basis(F, Sub, S)
        for j in new:
            v = S[:, j]
            m, z = v[: len(Mn)], v[len(Mn):]
            eps = F.zeros(M.n)
            eps[Mn] = m
            dz = F.zeros(self.size)
            dz[Fn1] = F.reduce(-z)
            self.gdeg.append(n)
            self.dgen.append(dz)
            self.eps.append(eps)
        self.stages.append((n, len(new)))

    # -- invariants -------------------------------------------------------------
    def betti(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for s in self.gdeg:
            out[s] = out.get(s, 0) + 1
        return out

    def residue_differential(self) -> np.ndarray:
        """Differential of k (x)_U F in the semibasis (ngens x ngens)."""
        F, U = self.field, self.algebra
        local = self.local or is_local(U)
        if local is None:
            raise ValueError("algebra is not local")
        out = F.zeros((self.ngens, self.ngens))
        for g in range(self.ngens):
            dz = self._pad(self.dgen[g]).reshape(self.ngens, U.n)
            out[:, g] = F.reduce(dz @ local.residue)
        return out


def semifree_resolution(m: DGModule, bound: int, minimal: bool = True) -> SemifreeResolution:
    return SemifreeResolution(m, minimal).extend_to(bound)


# -- Hom and tensor against a semi-free source -----------------------------------

def hom_from_resolution(res: SemifreeResolution, n: DGModule, gens=None) -> Complex:
    """Hom_A(F, N) for semi-free F; basis (g, j) <-> f(e_g) = w_j, index g*N.n + j.

    (df)(e_g) = d_N f(e_g) - (-1)^|f| f(d e_g),
    f(u e_h) = (-1)^{|f||u|} u f(e_h).
    """
    F, U = res.field, res.algebra
    G = res.ngens if gens is None else gens
    r = n.n
    degs = (n.degs[None, :] - np.asarray(res.gdeg[:G], dtype=np.int64)[:, None]).reshape(-1)
    D = F.zeros((G * r, G * r))
    for g in range(G):
        D[g * r:(g + 1) * r, g * r:(g + 1) * r] = n.d
    for g in range(G):
        dz = res._pad(res.dgen[g]).reshape(res.ngens, U.n)
        for h in np.flatnonzero(np.any(dz[:G] != 0, axis=1)):
            for parity in (0, 1):
                cols = np.flatnonzero((degs[h * r:(h + 1) * r] % 2) == parity)
                if not len(cols):
                    continue
                usig = np.where((parity * U.degs) % 2 == 0, 1, -1)
                op = np.tensordot(dz[h] * usig, n.act, axes=1)  # sum_b c_b (-1)^{|f||b|} act[b]
                s = -1 if parity else 1
                blk = D[g * r:(g + 1) * r, h * r + cols]
                D[g * r:(g + 1) * r, h * r + cols] = F.reduce(blk - s * op[:, cols])
    return Complex(F, degs, F.reduce(D))


def tensor_with_resolution(res: SemifreeResolution, n: DGModule, gens=None) -> Complex:
    """F (x)_A N for semi-free F; basis e_g (x) w_j at index g*N.n + j.

    d(e_g (x) w) = d(e_g) (x) w + (-1)^|g| e_g (x) dw and
    (u e_h) (x) w = (-1)^{|u||h|} e_h (x) u w.
    """
    F, U = res.field, res.algebra
    G = res.ngens if gens is None else gens
    r = n.n
    gd = np.asarray(res.gdeg[:G], dtype=np.int64)
    degs = (gd[:, None] + n.degs[None, :]).reshape(-1)
    D = F.zeros((G * r, G * r))
    for g in range(G):
        s = -1 if gd[g] % 2 else 1
        D[g * r:(g + 1) * r, g * r:(g + 1) * r] = F.reduce(s * n.d)
        dz = res._pad(res.dgen[g]).reshape(res.ngens, U.n)
        for h in np.flatnonzero(np.any(dz[:G] != 0, axis=1)):
            usig = np.where((gd[h] * U.degs) % 2 == 0, 1, -1)
            op = np.tensordot(dz[h] * usig, n.act, axes=1)
            D[h * r:(h + 1) * r, g * r:(g + 1) * r] = F.reduce(D[h * r:(h + 1) * r, g * r:(g + 1) * r] + op)
    return Complex(F, degs, F.reduce(D))


def _homology_at(c: Complex, degrees) -> dict[int, int]:
    out = {}
    for i in degrees:
        out[i] = c.dim(i) - rank(c.field, c.component(i)) - rank(c.field, c.component(i + 1))
    return out


def ext_required_bound(n: DGModule, hi: int) -> int:
    return hi + n.top + 2


def tor_required_bound(n: DGModule, hi: int) -> int:
    return hi - n.bottom + 2


def ext_dims(m: DGModule, n: DGModule, lo: int, hi: int, bound: int,
             minimal: bool = False, res: SemifreeResolution | None = None) -> dict[int, int]:
    """dim Ext^i_A(M, N) = dim H_{-i} Hom_A(F, N) for lo <= i <= hi."""
    need = ext_required_bound(n, hi)
    if bound < need:
        raise BoundError(f"bound {bound} too small for Ext^{hi}; need bound >= {need}")
    if res is None:
        res = SemifreeResolution(m, minimal=minimal and is_local(m.algebra) is not None)
    res.extend_to(bound)
    if not n.n or not res.ngens:
        return {i: 0 for i in range(lo, hi + 1)}
    gens = sum(1 for s in res.gdeg if s <= need)
    c = hom_from_resolution(res, n, gens)
    h = _homology_at(c, [-i for i in range(lo, hi + 1)])
    return {i: h[-i] for i in range(lo, hi + 1)}


def tor_dims(m: DGModule, n: DGModule, lo: int, hi: int, bound: int,
             minimal: bool = False, res: SemifreeResolution | None = None) -> dict[int, int]:
    """dim Tor_i^A(M, N) = dim H_i(F (x)_A N) for lo <= i <= hi."""
    need = tor_required_bound(n, hi)
    if bound < need:
        raise BoundError(f"bound {bound} too small for Tor_{hi}; need bound >= {need}")
    if res is None:
        res = SemifreeResolution(m, minimal=minimal and is_local(m.algebra) is not None)
    res.extend_to(bound)
    if not n.n or not res.ngens:
        return {i: 0 for i in range(lo, hi + 1)}
    gens = sum(1 for s in res.gdeg if s <= need)
    c = tensor_with_resolution(res, n, gens)
    return _homology_at(c, range(lo, hi + 1))


@dataclass
class BettiBass:
    betti: LaurentPolynomial
    bass: LaurentPolynomial
    window: tuple[int, int]

    def to_json(self) -> dict:
        return {"betti": self.betti.to_dict(), "bass": self.bass.to_dict(),
                "window": list(self.window), "verdict": "windowed"}


def betti_numbers(m: DGModule, bound: int) -> dict[int, int]:
    res = semifree_resolution(m, bound, minimal=True)
    return res.betti()


def bass_numbers(m: DGModule, lo: int, hi: int) -> dict[int, int]:
    U = m.algebra
    k = residue_module(U)
    need = ext_required_bound(m, hi)
    return ext_dims(k, m, lo, hi, need, minimal=True)


def betti_bass(m: DGModule, bound: int) -> BettiBass:
    if is_local(m.algebra) is None:
        raise ValueError("Betti and Bass numbers need a local algebra")
    b = betti_numbers(m, bound)
    lo = -bound
    mu = bass_numbers(m, lo, bound)
    return BettiBass(LaurentPolynomial.from_dict(b, lo, bound),
                     LaurentPolynomial.from_dict(mu, lo, bound), (lo, bound))


# -- semidualizing -----------------------------------------------------------------

@dataclass
class SemidualizingVerdict:
    ok: bool
    window: tuple[int, int]
    witness: int | None = None
    detail: dict = dc_field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return "yes-up-to-bound" if self.ok else f"no (degree {self.witness})"


def is_semidualizing_up_to(c: DGModule, bound: int) -> SemidualizingVerdict:
    """Does the homothety U -> Hom_A(F, C) induce isomorphisms on H_d for d >= -bound?

    F is a semi-free resolution of C; Hom_A(F, C) computes RHom_A(C, C).
    Degrees are checked from the top down, extending F only as needed, so a
    failure is usually found cheaply.
    """
    U, F = c.algebra, c.field
    if not c.n:
        return SemidualizingVerdict(False, (-bound, U.top), witness=0, detail={"reason": "zero module"})
    res = SemifreeResolution(c, minimal=is_local(U) is not None)
    hu = homology_dims(U.complex)
    top_hom = max(U.top, c.top - c.bottom)
    for d in range(top_hom, -bound - 1, -1):
        res.extend_to(c.top - d + 2)
        G = res.ngens
        H = hom_from_resolution(res, c, G)
        chi = F.zeros((H.n, U.n))
        for g in range(G):
            img = np.einsum("aij,j->ia", c.act, res.eps[g])
            chi[g * c.n:(g + 1) * c.n] = F.reduce(img)
        hd = _homology_at(H, [d])[d]
        ud = hu.get(d, 0)
        if hd != ud or induced_rank(chi, U.complex, H, d) != ud:
            return SemidualizingVerdict(False, (-bound, top_hom), witness=d,
                                        detail={"homology_of_hom": hd, "homology_of_algebra": ud})
    return SemidualizingVerdict(True, (-bound, top_hom))


def poincare_bass_identity_check(r: DGAlgebra, c: DGModule, bound: int, guard: int = 0) -> dict:
    """Check mu^m(R) = sum_t beta_t(C) mu^{m-t}(C) for 0 <= m <= bound - guard.

    Both sides are computed from independent resolutions (of C for the Betti
    numbers and of k for the two Bass series).
    """
    if not r.is_degree_zero():
        raise ValueError("expects an algebra concentrated in degree 0")
    from .modules import regular_module
    hi = bound - guard
    if hi < 0:
        raise BoundError("window is empty")
    R = regular_module(r)
    beta = betti_numbers(c, hi)
    mu_c = bass_numbers(c, 0, hi)
    mu_r = bass_numbers(R, 0, hi)
    rows = []
    ok = True
    for m in range(0, hi + 1):
        rhs = sum(beta.get(t, 0) * mu_c.get(m - t, 0) for t in range(0, m + 1))
        rows.append({"m": m, "mu_R": mu_r[m], "convolution": rhs})
        ok &= mu_r[m] == rhs
    return {"ok": ok, "window": [0, hi], "rows": rows,
            "betti_C": {str(k): v for k, v in sorted(beta.items())},
            "bass_C": {str(k): v for k, v in sorted(mu_c.items())},
            "bass_R": {str(k): v for k, v in sorted(mu_r.items())}}
