"""Exact dense linear algebra over the rationals and prime fields.

Matrices are plain numpy arrays.  Over F_p the entries are int64 residues in
``0..p-1`` (object dtype when p is large enough that a dot product could
overflow); over Q they are ``fractions.Fraction`` objects in an object array.
Every routine takes the :class:`Field` first and never rounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np


class FieldError(ValueError):
    """Raised for malformed field specifications or foreign scalars."""


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class Field:
    """Q when ``p == 0``, otherwise the prime field F_p."""

    p: int = 0

    def __post_init__(self):
        if self.p != 0 and not _is_prime(self.p):
            raise FieldError(f"{self.p} is not prime")

    @classmethod
    def parse(cls, text: str) -> "Field":
        t = str(text).strip()
        if t in ("Q", "q", "QQ"):
            return cls(0)
        for prefix in ("p:", "F", "GF"):
            if t.startswith(prefix):
                t = t[len(prefix):].strip("()")
                break
        try:
            return cls(int(t))
        except ValueError:
            raise FieldError(f"unrecognised field {text!r}") from None

    @property
    def name(self) -> str:
        return "Q" if self.p == 0 else f"p:{self.p}"

    @property
    def is_finite(self) -> bool:
        return self.p != 0

    @property
    def size(self) -> int:
        if not self.p:
            raise FieldError("Q is infinite")
        return self.p

    @property
    def dtype(self):
        # int64 is safe while a length-4096 dot product of residues fits
        if self.p and (self.p - 1) ** 2 * 4096 < 2**62:
            return np.int64
        return object

    def __str__(self):
        return self.name

    # scalars
    def scalar(self, x):
        if self.p:
            if isinstance(x, str):
                x = Fraction(x)
            if isinstance(x, Fraction):
                if x.denominator % self.p == 0:
                    raise FieldError(f"{x} has no image in F_{self.p}")
                return x.numerator * pow(x.denominator, -1, self.p) % self.p
            return int(x) % self.p
        return Fraction(x)

    def fmt(self, x) -> str:
        return str(self.scalar(x))

    def inv(self, x):
        x = self.scalar(x)
        if not x:
            raise ZeroDivisionError("inverse of zero")
        if self.p:
            return pow(int(x), -1, self.p)
        return 1 / x

    def elements(self):
        return range(self.size)

    # arrays
    def array(self, data, shape=None) -> np.ndarray:
        if isinstance(data, np.ndarray) and data.dtype != object:
            out = data.astype(np.int64)
            if self.p:
                return (out % self.p).astype(self.dtype)
            return self._frac(out)
        raw = np.array(data, dtype=object)
        if shape is not None:
            raw = raw.reshape(shape)
        return self.reduce(raw)

    def reduce(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a)
        if self.p:
            if a.dtype == object:
                flat = [self.scalar(x) for x in a.ravel()]
                return np.array(flat, dtype=self.dtype).reshape(a.shape)
            return (a % self.p).astype(self.dtype, copy=False)
        return self._frac(a)

    def _frac(self, a):
        flat = [x if isinstance(x, Fraction) else Fraction(x) for x in np.asarray(a).ravel()]
        out = np.empty(len(flat), dtype=object)
        out[:] = flat
        return out.reshape(np.shape(a))

    def zeros(self, shape) -> np.ndarray:
        if self.p:
            return np.zeros(shape, dtype=self.dtype)
        return self._frac(np.zeros(shape, dtype=np.int64))

    def eye(self, n: int) -> np.ndarray:
        return self.array(np.eye(n, dtype=np.int64))

    def matmul(self, a, b) -> np.ndarray:
        out = np.matmul(a, b)
        return out % self.p if self.p else out

    def random(self, rng: np.random.Generator, shape, lo=-3, hi=3) -> np.ndarray:
        if self.p:
            return rng.integers(0, self.p, size=shape).astype(self.dtype)
        return self._frac(rng.integers(lo, hi + 1, size=shape))

    def is_zero(self, a) -> bool:
        return not np.any(np.asarray(a) != 0)


def rref(F: Field, m) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns (first nonzero pivoting)."""
    A = F.reduce(np.asarray(m)).copy()
    if A.ndim != 2:
        raise ValueError("rref expects a matrix")
    rows, cols = A.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(A[r:, c] != 0)
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            A[[r, i]] = A[[i, r]]
        piv = A[r, c]
        if piv != 1:
            A[r] = A[r] * F.inv(piv)
            if F.p:
                A[r] %= F.p
        col = A[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col != 0)
        if hit.size:
            upd = A[hit] - np.outer(col[hit], A[r])
            A[hit] = upd % F.p if F.p else upd
        pivots.append(c)
        r += 1
    return A, pivots


def rank(F: Field, m) -> int:
    m = np.asarray(m)
    if m.size == 0:
        return 0
    # eliminate along the shorter side
    if m.shape[0] > m.shape[1]:
        m = m.T
    return len(rref(F, m)[1])


def kernel_basis(F: Field, m) -> np.ndarray:
    """Columns spanning {v : m v = 0}; shape (cols, nullity)."""
    m = np.asarray(m)
    cols = m.shape[1]
    if m.shape[0] == 0 or m.size == 0:
        return F.eye(cols)
    R, piv = rref(F, m)
    free = [c for c in range(cols) if c not in set(piv)]
    K = F.zeros((cols, len(free)))
    for j, f in enumerate(free):
        K[f, j] = 1
        for i, pc in enumerate(piv):
            K[pc, j] = -R[i, f]
    return F.reduce(K)


def solve(F: Field, m, b):
    """A particular solution x of m x = b, or None when inconsistent.

    ``b`` may be a vector or a matrix of right-hand sides.
    """
    m = np.asarray(m)
    b = np.asarray(b)
    vec = b.ndim == 1
    B = b.reshape(-1, 1) if vec else b
    if B.shape[0] != m.shape[0]:
        raise ValueError(f"dimension mismatch: {m.shape} vs rhs {b.shape}")
    rows, cols = m.shape
    if rows == 0:
        x = F.zeros((cols, B.shape[1]))
        return x[:, 0] if vec else x
    aug = np.concatenate([F.reduce(m), F.reduce(B)], axis=1)
    R, piv = rref(F, aug)
    if any(p >= cols for p in piv):
        return None
    x = F.zeros((cols, B.shape[1]))
    for i, pc in enumerate(piv):
        x[pc] = R[i, cols:]
    return x[:, 0] if vec else x


def column_basis(F: Field, vectors) -> np.ndarray:
    """Independent columns (in order) spanning the column space."""
    v = np.asarray(vectors)
    if v.size == 0:
        return F.zeros((v.shape[0], 0))
    _, piv = rref(F, v)
    return F.reduce(v[:, piv])


def row_space(F: Field, vectors) -> np.ndarray:
    """Reduced basis of the span of the columns of ``vectors``, as columns."""
    v = np.asarray(vectors)
    if v.size == 0:
        return F.zeros((v.shape[0], 0))
    R, piv = rref(F, v.T)
    return R[: len(piv)].T.copy()


def extend_basis(F: Field, sub, candidates) -> list[int]:
    """Indices of candidate columns that extend span(sub), chosen greedily."""
    sub = np.asarray(sub)
    candidates = np.asarray(candidates)
    n = candidates.shape[0]
    if sub.size == 0:
        sub = F.zeros((n, 0))
    M = np.concatenate([F.reduce(sub), F.reduce(candidates)], axis=1)
    _, piv = rref(F, M)
    off = sub.shape[1]
    return [p - off for p in piv if p >= off]


def in_span(F: Field, basis, v) -> bool:
    basis = np.asarray(basis)
    if basis.size == 0:
        return F.is_zero(v)
    return solve(F, basis, v) is not None


def quotient_dim(F: Field, big, small) -> int:
    """dim span(big) - dim span(small), after checking small lies in span(big)."""
    big = np.asarray(big)
    small = np.asarray(small)
    if small.size and big.size == 0:
        if not F.is_zero(small):
            raise ValueError("containment violated: big is empty")
        return 0
    for j in range(small.shape[1] if small.ndim == 2 else 0):
        if not in_span(F, big, small[:, j]):
            raise ValueError(f"containment violated by vector {list(map(F.fmt, small[:, j]))}")
    return rank(F, big) - rank(F, small)


def inverse(F: Field, m) -> np.ndarray:
    m = np.asarray(m)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("inverse of a non-square matrix")
    if n == 0:
        return F.zeros((0, 0))
    R, piv = rref(F, np.concatenate([F.reduce(m), F.eye(n)], axis=1))
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return R[:, n:].copy()


def block_diag(F: Field, *blocks) -> np.ndarray:
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = F.zeros((rows, cols))
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def batch_inverse(F: Field, mats) -> tuple[np.ndarray, np.ndarray]:
    """Invertibility mask and inverses for a stack (k, n, n) over a prime field.

    Gauss-Jordan run in lockstep on every matrix; singular entries of the
    output stack are left as garbage and flagged False in the mask.
    """
    if not F.p:
        raise FieldError("batch_inverse needs a finite field")
    A = np.asarray(mats, dtype=np.int64) % F.p
    k, n, _ = A.shape
    aug = np.concatenate([A, np.broadcast_to(np.eye(n, dtype=np.int64), (k, n, n))], axis=2)
    ok = np.ones(k, dtype=bool)
    inv_table = np.array([0] + [pow(x, -1, F.p) for x in range(1, F.p)], dtype=np.int64)
    rows = np.arange(k)
    for c in range(n):
        cand = aug[:, c:, c] != 0
        has = cand.any(axis=1)
        ok &= has
        piv = c + np.argmax(cand, axis=1)
        top, pr = aug[rows, c].copy(), aug[rows, piv].copy()
        aug[rows, c], aug[rows, piv] = pr, top
        aug[:, c] = (aug[:, c] * inv_table[aug[:, c, c]][:, None]) % F.p
        f = aug[:, :, c].copy()
        f[:, c] = 0
        aug = (aug - f[:, :, None] * aug[:, c][:, None, :]) % F.p
    return ok, aug[:, :, n:].astype(F.dtype)
