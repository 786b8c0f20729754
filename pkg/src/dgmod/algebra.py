"""Finite-dimensional DG algebras given by structure constants.

``mult[a]`` is the matrix of left multiplication by basis element ``a``:
``e_a * e_b = sum_k mult[a][k, b] e_k``.  ``d`` is the global differential and
``unit`` the coordinate vector of 1.  Degrees are non-negative.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .complexes import Complex, Report, homology_dims, validate_complex, _signs
from .linalg import Field, solve, rank, kernel_basis, extend_basis


@dataclass
class DGAlgebra:
    field: Field
    degs: np.ndarray
    d: np.ndarray
    mult: np.ndarray
    unit: np.ndarray
    name: str = ""

    def __post_init__(self):
        F = self.field
        self.degs = np.asarray(self.degs, dtype=np.int64).reshape(-1)
        n = len(self.degs)
        self.d = F.reduce(np.asarray(self.d).reshape(n, n)) if n else F.zeros((0, 0))
        self.mult = F.reduce(np.asarray(self.mult).reshape(n, n, n)) if n else F.zeros((0, 0, 0))
        self.unit = F.reduce(np.asarray(self.unit).reshape(n))

    @property
    def n(self) -> int:
        return len(self.degs)

    @property
    def top(self) -> int:
        return int(self.degs.max()) if self.n else 0

    @property
    def complex(self) -> Complex:
        return Complex(self.field, self.degs, self.d)

    def idx(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.degs == i)

    def dim(self, i: int) -> int:
        return int(np.count_nonzero(self.degs == i))

    def left(self, x) -> np.ndarray:
        """Matrix of left multiplication by the element with coordinates x."""
        return self.field.reduce(np.tensordot(np.asarray(x), self.mult, axes=1))

    def product(self, x, y) -> np.ndarray:
        return self.field.matmul(self.left(x), np.asarray(y))

    def basis_vector(self, a: int) -> np.ndarray:
        e = self.field.zeros(self.n)
        e[a] = 1
        return e

    def is_degree_zero(self) -> bool:
        return not np.any(self.degs != 0)


def validate_algebra(u: DGAlgebra) -> Report:
    F = u.field
    rep = validate_complex(u.complex)
    n = u.n
    if np.any(u.degs < 0):
        rep.fail("algebra has basis elements in negative degree")
    if u.mult.shape != (n, n, n):
        rep.fail(f"structure tensor has shape {u.mult.shape}")
        return rep
    # homogeneity of the product: e_a e_b lies in degree |a|+|b|
    a, k, b = np.nonzero(u.mult != 0)
    bad = u.degs[k] != u.degs[a] + u.degs[b]
    for x, y, z in list(zip(a[bad], b[bad], k[bad]))[:5]:
        rep.fail(f"product e_{x} e_{y} has a component on e_{z} of the wrong degree")
    # unit
    if np.any(u.degs[np.flatnonzero(u.unit != 0)] != 0):
        rep.fail("unit is not homogeneous of degree 0")
    if not F.is_zero(F.reduce(u.left(u.unit) - F.eye(n))):
        rep.fail("unit does not act as the identity on the left")
    right_unit = F.reduce(np.tensordot(u.mult, u.unit, axes=([2], [0])))  # [a, k] = coeff of e_k in e_a * 1
    if not F.is_zero(F.reduce(right_unit.T - F.eye(n))):
        rep.fail("unit does not act as the identity on the right")
    if n and not F.is_zero(u.d @ u.unit):
        rep.fail("differential of the unit is nonzero")
    sg = _signs(u.degs)
    for x in range(n):
        # associativity: L(e_x e_y) = L(e_x) L(e_y)
        Lx = u.mult[x]
        for y in range(n):
            lhs = u.left(Lx[:, y])
            rhs = F.matmul(Lx, u.mult[y])
            if not F.is_zero(F.reduce(lhs - rhs)):
                rep.fail(f"associativity fails for (e_{x} e_{y}) e_z")
            if y < x or y == x:
                s = 1 if (u.degs[x] * u.degs[y]) % 2 == 0 else -1
                if not F.is_zero(F.reduce(Lx[:, y] - s * u.mult[y][:, x])):
                    rep.fail(f"graded commutativity fails for e_{x}, e_{y}")
        if u.degs[x] % 2 and not F.is_zero(Lx[:, x]):
            rep.fail(f"odd element e_{x} does not square to zero")
        # Leibniz: d L(x) = L(dx) + (-1)^|x| L(x) d
        lhs = F.matmul(u.d, Lx)
        rhs = F.reduce(u.left(u.d[:, x]) + sg[x] * F.matmul(Lx, u.d))
        if not F.is_zero(F.reduce(lhs - rhs)):
            rep.fail(f"Leibniz rule fails for e_{x}")
    return rep


@dataclass
class AlgebraMorphism:
    source: DGAlgebra
    target: DGAlgebra
    f: np.ndarray  # target.n x source.n


def check_algebra_morphism(phi: AlgebraMorphism) -> Report:
    A, B, f = phi.source, phi.target, phi.f
    F = A.field
    rep = Report()
    r, c = np.nonzero(f != 0)
    if np.any(B.degs[r] != A.degs[c]):
        rep.fail("morphism is not homogeneous of degree 0")
    if not F.is_zero(F.reduce(F.matmul(B.d, f) - F.matmul(f, A.d))):
        rep.fail("morphism does not commute with differentials")
    if not F.is_zero(F.reduce(F.matmul(f, A.unit) - B.unit)):
        rep.fail("unit not sent to unit")
    for a in range(A.n):
        for b in range(A.n):
            lhs = F.matmul(f, A.mult[a][:, b])
            rhs = B.product(f[:, a], f[:, b])
            if not F.is_zero(F.reduce(lhs - rhs)):
                rep.fail(f"product of e_{a}, e_{b} not preserved")
    return rep


# -- constructions ---------------------------------------------------------

def field_algebra(F: Field) -> DGAlgebra:
    return DGAlgebra(F, [0], F.zeros((1, 1)), F.array([[[1]]]), F.array([1]), name="F")


def monomial_algebra(F: Field, monomials, name: str = "") -> DGAlgebra:
    """Commutative degree-0 algebra with the given standard monomials as basis.

    ``monomials`` must be closed under division; products leaving the set are 0.
    Example: ``[(0,), (1,)]`` is F[x]/(x^2).
    """
    mons = [tuple(m) for m in monomials]
    pos = {m: i for i, m in enumerate(mons)}
    n = len(mons)
    mult = F.zeros((n, n, n))
    for a, ma in enumerate(mons):
        for b, mb in enumerate(mons):
            s = tuple(x + y for x, y in zip(ma, mb))
            if s in pos:
                mult[a][pos[s], b] = 1
    unit = F.zeros(n)
    unit[pos[tuple(0 for _ in mons[0])]] = 1
    return DGAlgebra(F, np.zeros(n, dtype=np.int64), F.zeros((n, n)), mult, unit, name=name)


def truncated_polynomial(F: Field, nvars: int, power: int, name: str = "") -> DGAlgebra:
    """F[x_1..x_n] / (x_1..x_n)^power."""
    mons = [m for m in np.ndindex(*([power] * nvars)) if sum(m) < power]
    mons.sort(key=lambda m: (sum(m), tuple(-x for x in m)))
    return monomial_algebra(F, mons, name=name)


def product_algebra(F: Field, copies: int = 2) -> DGAlgebra:
    """F x F x ... (idempotent basis); not local once copies > 1."""
    n = copies
    mult = F.zeros((n, n, n))
    for a in range(n):
        mult[a][a, a] = 1
    return DGAlgebra(F, np.zeros(n, dtype=np.int64), F.zeros((n, n)), mult, F.array([1] * n), name=f"F^{n}")


def _wedge_sign(s, t) -> int:
    """Sign of sorting the concatenation s+t (disjoint sorted tuples)."""
    inv = sum(1 for x in s for y in t if x > y)
    return -1 if inv % 2 else 1


def koszul(r: DGAlgebra, seq, name: str = "") -> DGAlgebra:
    """Exterior algebra over r on generators e_1..e_n with d(e_j) = seq[j].

    Basis order: subsets by size then lexicographically, and within each
    subset the basis of r.  Index of ``b * e_S`` is ``pos[S] * r.n + b``.
    """
    F = r.field
    if not r.is_degree_zero():
        raise ValueError("koszul expects an algebra concentrated in degree 0")
    seq = [F.array(a).reshape(-1) for a in seq]
    for a in seq:
        if a.shape != (r.n,):
            raise ValueError("sequence element does not lie in the base algebra")
    k = len(seq)
    subsets = [s for m in range(k + 1) for s in combinations(range(k), m)]
    pos = {s: i for i, s in enumerate(subsets)}
    m = r.n
    N = len(subsets) * m

    def ix(s, b):
        return pos[s] * m + b

    degs = np.array([len(s) for s in subsets for _ in range(m)], dtype=np.int64)
    mult = F.zeros((N, N, N))
    for s in subsets:
        for t in subsets:
            if set(s) & set(t):
                continue
            u = tuple(sorted(s + t))
            sg = _wedge_sign(s, t)
            for a in range(m):
                for b in range(m):
                    col = r.mult[a][:, b]
                    for c in np.flatnonzero(col != 0):
                        mult[ix(s, a)][ix(u, c), ix(t, b)] += sg * col[c]
    d = F.zeros((N, N))
    for s in subsets:
        for j, g in enumerate(s):
            rest = s[:j] + s[j + 1:]
            sg = -1 if j % 2 else 1
            # d(b e_S) = sum_j (-1)^j (b a_g) e_{S - g}
            for b in range(m):
                prod = F.matmul(r.mult[b], seq[g])
                for c in np.flatnonzero(prod != 0):
                    d[ix(rest, c), ix(s, b)] += sg * prod[c]
    unit = F.zeros(N)
    unit[ix((), 0):ix((), 0) + m] = r.unit
    return DGAlgebra(F, degs, F.reduce(d), F.reduce(mult), unit, name=name or f"K({r.name})")


def koszul_inclusion(r: DGAlgebra, k: DGAlgebra) -> AlgebraMorphism:
    """The structure map r -> koszul(r, seq) onto the e_{} component."""
    F = r.field
    f = F.zeros((k.n, r.n))
    f[: r.n, : r.n] = F.eye(r.n)
    return AlgebraMorphism(r, k, f)


def dual_numbers(u: DGAlgebra) -> DGAlgebra:
    """U[eps] on U (+) U: coordinates (x, y) stand for x*eps + y."""
    F = u.field
    n = u.n
    z = F.zeros((n, n))
    degs = np.concatenate([u.degs, u.degs])
    d = np.block([[u.d, z], [z, u.d]])
    mult = F.zeros((2 * n, 2 * n, 2 * n))
    for a in range(n):
        L = u.mult[a]
        mult[a] = np.block([[z, L], [z, z]])       # (a eps)(x eps + y) = (a y) eps
        mult[n + a] = np.block([[L, z], [z, L]])   # a (x eps + y) = (a x) eps + a y
    unit = np.concatenate([F.zeros(n), u.unit])
    return DGAlgebra(F, degs, d, mult, unit, name=f"{u.name}[eps]")


def epsilon(u: DGAlgebra) -> np.ndarray:
    """Coordinates of eps in dual_numbers(u)."""
    return np.concatenate([u.unit, u.field.zeros(u.n)])


def dual_numbers_maps(u: DGAlgebra, ue: DGAlgebra):
    """The inclusion U -> U[eps] and the retraction U[eps] -> U (eps -> 0)."""
    F = u.field
    n = u.n
    inc = np.concatenate([F.zeros((n, n)), F.eye(n)], axis=0)
    ret = np.concatenate([F.zeros((n, n)), F.eye(n)], axis=1)
    return AlgebraMorphism(u, ue, inc), AlgebraMorphism(ue, u, ret)


# -- locality ---------------------------------------------------------------

@dataclass
class LocalData:
    """Maximal ideal of U_0 and the residue map U -> F (zero off degree 0)."""

    max_ideal: np.ndarray   # columns spanning m_0 inside U (global coordinates)
    residue: np.ndarray     # row vector: rho(e_a)


def _minimal_polynomial(F: Field, u: DGAlgebra, x) -> np.ndarray:
    """Monic coefficients c_0..c_k with sum c_i x^i = 0, via powers of x."""
    powers = [u.unit]
    L = u.left(x)
    while True:
        nxt = F.matmul(L, powers[-1])
        P = np.stack(powers, axis=1)
        sol = solve(F, P, nxt)
        if sol is not None:
            return np.concatenate([F.reduce(-sol), F.array([1])])
        powers.append(nxt)


def _single_eigenvalue(F: Field, coeffs):
    """If the monic polynomial is (t - c)^k with c in F, return c."""
    k = len(coeffs) - 1
    if k == 0:
        return None
    p = F.p
    # (t - c)^k with k = p^v k', p not dividing k': the coefficient of
    # t^(k - p^v) is -k' c^(p^v), and c^(p^v) = c on the prime field
    q = 1
    if p:
        while k % (q * p) == 0:
            q *= p
    kp = k // q
    c = F.scalar(-coeffs[k - q] * F.inv(kp))
    # verify by expansion
    poly = [F.scalar(1)]
    for _ in range(k):
        nxt = [F.scalar(0)] * (len(poly) + 1)
        for i, a in enumerate(poly):
            nxt[i + 1] = F.scalar(nxt[i + 1] + a)
            nxt[i] = F.scalar(nxt[i] - c * a)
        poly = nxt
    if all(F.scalar(a - b) == 0 for a, b in zip(poly, coeffs)):
        return c
    return None


def is_local(u: DGAlgebra):
    """LocalData when U_0 is local with residue field F, else None.

    Each basis element b of U_0 must satisfy (b - c_b)^k = 0 for one scalar
    c_b, read off its minimal polynomial; then b -> c_b is the residue map and
    the elements b - c_b span the maximal ideal (commuting nilpotents).
    """
    F = u.field
    z = u.idx(0)
    if not len(z):
        return None
    residue = F.zeros(u.n)
    for b in z:
        c = _single_eigenvalue(F, _minimal_polynomial(F, u, u.basis_vector(b)))
        if c is None:
            return None
        residue[b] = c
    # the residue map must be multiplicative and send 1 to 1
    if F.scalar(residue @ u.unit) != 1:
        return None
    for a in z:
        for b in z:
            if F.scalar(residue @ u.mult[a][:, b]) != F.scalar(residue[a] * residue[b]):
                return None
    # m_0 = kernel of the residue map restricted to U_0
    K = kernel_basis(F, residue[z].reshape(1, -1))
    m0 = F.zeros((u.n, K.shape[1]))
    m0[z] = K
    return LocalData(m0, residue)


def minimal_generators(u: DGAlgebra, local: LocalData | None = None) -> list[np.ndarray]:
    """Elements of m_0 whose classes form a basis of m_0 / m_0^2."""
    F = u.field
    local = local or is_local(u)
    if local is None:
        raise ValueError("algebra is not local")
    m0 = local.max_ideal
    sq = [F.matmul(u.left(m0[:, i]), m0[:, j]) for i in range(m0.shape[1]) for j in range(m0.shape[1])]
    S = np.stack(sq, axis=1) if sq else F.zeros((u.n, 0))
    keep = extend_basis(F, S, m0)
    return [m0[:, i] for i in keep]


def units_by_enumeration(u: DGAlgebra) -> list[tuple]:
    """All units of U_0 over a finite prime field (oracle for small cases)."""
    F = u.field
    z = u.idx(0)
    out = []
    for coeffs in np.ndindex(*([F.size] * len(z))):
        x = F.zeros(u.n)
        x[z] = coeffs
        if rank(F, u.left(x)[np.ix_(z, z)]) == len(z):
            out.append(tuple(coeffs))
    return out


def homology_algebra_dims(u: DGAlgebra) -> dict[int, int]:
    return homology_dims(u.complex)
