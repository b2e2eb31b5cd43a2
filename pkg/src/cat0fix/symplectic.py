"""Exact and floating symplectic matrices in the block convention J = [[0, I], [-I, 0]]."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np


class NotSymplecticError(ValueError):
    pass


def standard_form(g: int, exact: bool = False) -> np.ndarray:
    dtype = object if exact else float
    J = np.zeros((2 * g, 2 * g), dtype=dtype)
    for i in range(g):
        J[i, g + i] = 1
        J[g + i, i] = -1
    if exact:
        J = np.vectorize(int, otypes=[object])(J)
    return J


def _to_exact(x) -> int | Fraction:
    if isinstance(x, bool):
        raise TypeError("boolean matrix entry")
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else x
    if isinstance(x, str):
        f = Fraction(x)
        return f.numerator if f.denominator == 1 else f
    if isinstance(x, (float, np.floating)):
        f = Fraction(float(x))
        if f.denominator > 1 << 20:
            raise TypeError(f"entry {x!r} is not a short rational")
        return f.numerator if f.denominator == 1 else f
    raise TypeError(f"unsupported matrix entry {x!r}")


@dataclass(frozen=True)
class SymplecticMatrix:
    """A 2g x 2g matrix with exact integer or rational entries preserving J."""

    entries: tuple[tuple[int | Fraction, ...], ...]

    def __post_init__(self):
        n = len(self.entries)
        if n == 0 or n % 2 or any(len(row) != n for row in self.entries):
            raise NotSymplecticError(f"need a square matrix of even size, got {n} rows")
        M = self.exact()
        J = standard_form(n // 2, exact=True)
        if not np.array_equal(M.T.dot(J).dot(M), J):
            raise NotSymplecticError("M^T J M != J")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "SymplecticMatrix":
        return cls(tuple(tuple(_to_exact(x) for x in row) for row in rows))

    @property
    def g(self) -> int:
        return len(self.entries) // 2

    @property
    def is_integral(self) -> bool:
        return all(isinstance(x, int) for row in self.entries for x in row)

    def exact(self) -> np.ndarray:
        M = np.empty((len(self.entries),) * 2, dtype=object)
        for i, row in enumerate(self.entries):
            for j, x in enumerate(row):
                M[i, j] = x
        return M

    def as_float(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.entries])

    def __matmul__(self, other: "SymplecticMatrix") -> "SymplecticMatrix":
        P = self.exact().dot(other.exact())
        return SymplecticMatrix.from_rows(P.tolist())

    def inverse(self) -> "SymplecticMatrix":
        # M^{-1} = -J M^T J
        J = standard_form(self.g, exact=True)
        return SymplecticMatrix.from_rows((-(J.dot(self.exact().T).dot(J))).tolist())

    def to_dict(self) -> dict:
        return {
            "entries": [
                [x if isinstance(x, int) else f"{x.numerator}/{x.denominator}" for x in row]
                for row in self.entries
            ]
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SymplecticMatrix":
        return cls.from_rows(d["entries"])


def identity(g: int) -> SymplecticMatrix:
    return SymplecticMatrix.from_rows(np.eye(2 * g, dtype=int).tolist())


def transvection(v: Sequence[int], k: int = 1) -> SymplecticMatrix:
    """x -> x + k <x, v> v, exact."""
    v = np.array([int(t) for t in v], dtype=object)
    g = len(v) // 2
    J = standard_form(g, exact=True)
    M = np.eye(2 * g, dtype=int).astype(object) - k * np.outer(v, v).dot(J)
    return SymplecticMatrix.from_rows(M.tolist())


def is_symplectic_float(M: np.ndarray, tol: float = 1e-10) -> bool:
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if M.shape != (n, n) or n % 2:
        return False
    J = standard_form(n // 2)
    return bool(np.max(np.abs(M.T @ J @ M - J)) <= tol * max(1.0, np.max(np.abs(M)) ** 2))


def random_symplectic(g: int, rng: np.random.Generator, steps: int = 6, scale: float = 0.6) -> np.ndarray:
    """Random real symplectic matrix built from transvections, shears and block rotations."""
    M = np.eye(2 * g)
    J = standard_form(g)
    for _ in range(steps):
        kind = rng.integers(3)
        if kind == 0:
            v = rng.integers(-1, 2, size=2 * g).astype(float)
            if not v.any():
                continue
            k = rng.uniform(-scale, scale)
            T = np.eye(2 * g) - k * np.outer(v, v) @ J
        elif kind == 1:
            A = np.eye(g) + rng.uniform(-scale, scale, size=(g, g)) / g
            if abs(np.linalg.det(A)) < 0.2:
                continue
            T = np.block([[A, np.zeros((g, g))], [np.zeros((g, g)), np.linalg.inv(A).T]])
        else:
            # U(g) rotation: real form of a unitary from a random Hermitian generator
            H = rng.normal(size=(g, g)) + 1j * rng.normal(size=(g, g))
            H = (H + H.conj().T) / 2
            w, V = np.linalg.eigh(H)
            U = V @ np.diag(np.exp(1j * w)) @ V.conj().T
            T = np.block([[U.real, -U.imag], [U.imag, U.real]])
        M = T @ M
    return M
