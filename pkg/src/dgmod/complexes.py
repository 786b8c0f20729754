"""Bounded complexes of finite-dimensional vector spaces, indexed homologically.

A complex stores one global basis.  ``degs[j]`` is the degree of basis vector
``j`` and ``d`` is the full square matrix of the differential, so the block
``d[deg == i-1][:, deg == i]`` is the component d_i: V_i -> V_{i-1}.  The basis
need not be sorted by degree, which lets tensor and Hom constructions keep
their natural index order.

Signs: Hom differential ``f -> d_b f - (-1)^|f| f d_a``, tensor differential
``x (x) y -> dx (x) y + (-1)^|x| x (x) dy``, shift by i multiplies d by (-1)^i.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .linalg import Field, kernel_basis, rank, extend_basis, solve, block_diag


@dataclass(frozen=True)
class GradedSpace:
    min_degree: int
    dims: tuple[int, ...]

    def __post_init__(self):
        if any(d < 0 for d in self.dims):
            raise ValueError("negative dimension")
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))

    @classmethod
    def from_degrees(cls, degs) -> "GradedSpace":
        degs = list(degs)
        if not degs:
            return cls(0, ())
        lo, hi = min(degs), max(degs)
        return cls(lo, tuple(degs.count(i) for i in range(lo, hi + 1)))

    @property
    def total(self) -> int:
        return sum(self.dims)

    @property
    def max_degree(self) -> int:
        return self.min_degree + len(self.dims) - 1

    def dim(self, i: int) -> int:
        k = i - self.min_degree
        return self.dims[k] if 0 <= k < len(self.dims) else 0

    def degrees(self) -> np.ndarray:
        return np.repeat(np.arange(self.min_degree, self.min_degree + len(self.dims)), self.dims).astype(np.int64)


class HomologicallyTrivial:
    """Sentinel returned by :func:`inf_sup_amp` when all homology vanishes."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "HOMOLOGICALLY_TRIVIAL"


HOMOLOGICALLY_TRIVIAL = HomologicallyTrivial()


@dataclass
class Complex:
    field: Field
    degs: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        self.degs = np.asarray(self.degs, dtype=np.int64).reshape(-1)
        n = len(self.degs)
        self.d = self.field.reduce(np.asarray(self.d).reshape(n, n)) if n else self.field.zeros((0, 0))

    @classmethod
    def from_blocks(cls, F: Field, min_degree: int, dims, differentials) -> "Complex":
        """``differentials[k]`` is d at degree ``min_degree + k + 1``."""
        space = GradedSpace(min_degree, tuple(dims))
        degs = space.degrees()
        n = len(degs)
        d = F.zeros((n, n))
        offs = np.concatenate([[0], np.cumsum(space.dims)]).astype(int)
        for k, blk in enumerate(differentials):
            blk = F.array(blk) if len(np.shape(blk)) == 2 else F.zeros((space.dims[k], space.dims[k + 1]))
            if blk.size == 0:
                continue
            if blk.shape != (space.dims[k], space.dims[k + 1]):
                raise ValueError(f"differential at degree {min_degree + k + 1} has shape {blk.shape}, "
                                 f"expected {(space.dims[k], space.dims[k + 1])}")
            d[offs[k]:offs[k + 1], offs[k + 1]:offs[k + 2]] = blk
        return cls(F, degs, d)

    @property
    def n(self) -> int:
        return len(self.degs)

    def idx(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.degs == i)

    def dim(self, i: int) -> int:
        return int(np.count_nonzero(self.degs == i))

    def degree_range(self) -> range:
        if not self.n:
            return range(0)
        return range(int(self.degs.min()), int(self.degs.max()) + 1)

    def component(self, i: int) -> np.ndarray:
        """d_i : V_i -> V_{i-1} as a dense block."""
        return self.d[np.ix_(self.idx(i - 1), self.idx(i))]

    @property
    def space(self) -> GradedSpace:
        return GradedSpace.from_degrees(self.degs.tolist())

    def is_sorted(self) -> bool:
        return bool(np.all(np.diff(self.degs) >= 0))

    def permuted(self, order) -> "Complex":
        order = np.asarray(order, dtype=np.int64)
        return Complex(self.field, self.degs[order], self.d[np.ix_(order, order)])

    def sorted(self) -> tuple["Complex", np.ndarray]:
        order = np.argsort(self.degs, kind="stable")
        return self.permuted(order), order


@dataclass
class Report:
    ok: bool = True
    failures: list[str] = dc_field(default_factory=list)

    def fail(self, msg: str):
        self.ok = False
        self.failures.append(msg)

    def __bool__(self):
        return self.ok


def validate_complex(c: Complex) -> Report:
    rep = Report()
    F = c.field
    n = c.n
    if c.d.shape != (n, n):
        rep.fail(f"differential has shape {c.d.shape}, expected {(n, n)}")
        return rep
    # homogeneity: nonzero entries only from degree i to degree i-1
    rows, cols = np.nonzero(c.d != 0)
    bad = c.degs[rows] != c.degs[cols] - 1
    for r, s in zip(rows[bad][:5], cols[bad][:5]):
        rep.fail(f"differential entry ({r},{s}) is not of degree -1")
    sq = F.matmul(c.d, c.d)
    for i in c.degree_range():
        blk = sq[np.ix_(c.idx(i - 2), c.idx(i))]
        if not F.is_zero(blk):
            rep.fail(f"d_{i - 1} d_{i} != 0 (at degree {i - 1})")
    return rep


def cycles(c: Complex, i: int) -> np.ndarray:
    """Basis of Z_i as columns in the coordinates of V_i."""
    return kernel_basis(c.field, c.component(i))


def homology_dims(c: Complex) -> dict[int, int]:
    out = {}
    for i in c.degree_range():
        di = c.component(i)
        z = c.dim(i) - rank(c.field, di)
        b = rank(c.field, c.component(i + 1))
        out[i] = z - b
    return out


def homology_basis(c: Complex, i: int) -> np.ndarray:
    """Cycles in V_i whose classes form a basis of H_i (columns, local coords)."""
    F = c.field
    Z = cycles(c, i)
    B = c.component(i + 1)
    keep = extend_basis(F, B, Z)
    return Z[:, keep]


def inf_sup_amp(c: Complex):
    h = {i: v for i, v in homology_dims(c).items() if v}
    if not h:
        return HOMOLOGICALLY_TRIVIAL
    lo, hi = min(h), max(h)
    return lo, hi, hi - lo


def shift(c: Complex, i: int) -> Complex:
    sign = -1 if i % 2 else 1
    return Complex(c.field, c.degs + i, c.field.reduce(sign * c.d))


def soft_truncate(c: Complex, n: int) -> Complex:
    return soft_truncation_data(c, n)[0]


def soft_truncation_data(c: Complex, n: int):
    """Truncated complex, kept old basis indices below n, and the degree-n
    quotient data ``(section, projection)``.

    The quotient M_n / Im d_{n+1} is modelled by the standard basis vectors of
    M_n not in the span of the image (chosen greedily); ``projection`` sends a
    vector of M_n to quotient coordinates.
    """
    F = c.field
    low = np.flatnonzero(c.degs < n)
    top = c.idx(n)
    img = c.component(n + 1)
    E = F.eye(len(top))
    keep = extend_basis(F, img, E)
    section = E[:, keep]
    basis = np.concatenate([img if img.size else F.zeros((len(top), 0)), section], axis=1)
    # coordinates of e_j in [img | section]; rows of the section part
    if len(top):
        coords = solve(F, basis, E)
        proj = coords[img.shape[1]:, :] if img.size else coords
    else:
        proj = F.zeros((0, 0))
    m = len(low) + len(keep)
    degs = np.concatenate([c.degs[low], np.full(len(keep), n, dtype=np.int64)])
    d = F.zeros((m, m))
    d[: len(low), : len(low)] = c.d[np.ix_(low, low)]
    if len(keep):
        # d_n on the quotient: apply d_n to the section vectors
        d[: len(low), len(low):] = F.matmul(c.d[np.ix_(low, top)], section)
    return Complex(F, degs, d), low, top, section, proj


def truncation_map(c: Complex, n: int) -> np.ndarray:
    """Matrix of the canonical surjection c -> soft_truncate(c, n)."""
    t, low, top, section, proj = soft_truncation_data(c, n)
    F = c.field
    f = F.zeros((t.n, c.n))
    f[np.arange(len(low)), low] = 1
    if len(top):
        f[np.ix_(np.arange(len(low), t.n), top)] = proj
    return f


def direct_sum(a: Complex, b: Complex) -> Complex:
    return Complex(a.field, np.concatenate([a.degs, b.degs]), block_diag(a.field, a.d, b.d))


def _signs(degs) -> np.ndarray:
    return np.where(np.asarray(degs) % 2 == 0, 1, -1)


def tensor_complex(a: Complex, b: Complex) -> Complex:
    """Basis index ``i * b.n + j`` for ``a_i (x) b_j``."""
    F = a.field
    degs = (a.degs[:, None] + b.degs[None, :]).reshape(-1)
    sa = F.array(np.diag(_signs(a.degs)))
    d = np.kron(a.d, F.eye(b.n)) + np.kron(sa, b.d)
    return Complex(F, degs, F.reduce(d))


def hom_positions(a_degs, b_degs):
    """All matrix positions (row in b, col in a) and their degree."""
    rows, cols = np.meshgrid(np.arange(len(b_degs)), np.arange(len(a_degs)), indexing="ij")
    rows, cols = rows.reshape(-1), cols.reshape(-1)
    return rows, cols, np.asarray(b_degs)[rows] - np.asarray(a_degs)[cols]


def hom_complex(a: Complex, b: Complex) -> Complex:
    """Hom_F(a, b); basis vector ``r * a.n + c`` is the matrix unit E_{rc}."""
    F = a.field
    rows, cols, degs = hom_positions(a.degs, b.degs)
    # vec(d_b f) = (d_b (x) I) vec f ; vec(f d_a) = (I (x) d_a^T) vec f
    left = np.kron(b.d, F.eye(a.n))
    right = np.kron(F.eye(b.n), a.d.T)
    sign = F.array(np.diag(_signs(degs)))
    d = F.reduce(left - F.matmul(right, sign))
    return Complex(F, degs, d)


def chain_map_failures(f, a: Complex, b: Complex, degree: int = 0) -> list[int]:
    """Degrees where ``d_b f != (-1)^degree f d_a`` or f is inhomogeneous."""
    F = a.field
    f = F.reduce(np.asarray(f))
    bad = set()
    r, s = np.nonzero(f != 0)
    for i, j in zip(r, s):
        if b.degs[i] != a.degs[j] + degree:
            bad.add(int(a.degs[j]))
    sgn = -1 if degree % 2 else 1
    diff = F.reduce(F.matmul(b.d, f) - sgn * F.matmul(f, a.d))
    for j in np.flatnonzero(np.any(diff != 0, axis=0)):
        bad.add(int(a.degs[j]))
    return sorted(bad)


def induced_rank(f, a: Complex, b: Complex, i: int) -> int:
    """Rank of H_i(f) for a chain map f: a -> b of degree 0."""
    F = a.field
    Z = cycles(a, i)
    fz = F.matmul(f[np.ix_(b.idx(i), a.idx(i))], Z) if Z.size else F.zeros((b.dim(i), 0))
    B = b.component(i + 1)
    both = np.concatenate([B, fz], axis=1)
    return rank(F, both) - rank(F, B)


def is_quasiiso(f, a: Complex, b: Complex) -> bool:
    bad = chain_map_failures(f, a, b)
    if bad:
        raise ValueError(f"not a chain map at degree {bad[0]}")
    return not quasiiso_failures(f, a, b)


def quasiiso_failures(f, a: Complex, b: Complex, degrees=None) -> list[int]:
    ha, hb = homology_dims(a), homology_dims(b)
    if degrees is None:
        degrees = sorted(set(ha) | set(hb))
    bad = []
    for i in degrees:
        x, y = ha.get(i, 0), hb.get(i, 0)
        if x != y or induced_rank(f, a, b, i) != x:
            bad.append(i)
    return bad
