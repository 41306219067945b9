"""2x2 complex matrices, the eight basic gates and closed-form eigenvalues.

Matrices are plain tuples of four Python ``complex`` numbers in row-major
order. At this size, native complex arithmetic is faster than numpy.
"""

from __future__ import annotations

import cmath
import math
from typing import NamedTuple


class ComplexMatrix2(NamedTuple):
    m00: complex
    m01: complex
    m10: complex
    m11: complex

    @classmethod
    def from_rows(cls, rows) -> "ComplexMatrix2":
        (a, b), (c, d) = rows
        return cls(complex(a), complex(b), complex(c), complex(d))

    def rows(self) -> list[list[complex]]:
        return [[self.m00, self.m01], [self.m10, self.m11]]

    def trace(self) -> complex:
        return self.m00 + self.m11

    def det(self) -> complex:
        return self.m00 * self.m11 - self.m01 * self.m10

    def scale(self, c: complex) -> "ComplexMatrix2":
        return ComplexMatrix2(c * self.m00, c * self.m01, c * self.m10, c * self.m11)

    def dagger(self) -> "ComplexMatrix2":
        return ComplexMatrix2(
            self.m00.conjugate(), self.m10.conjugate(),
            self.m01.conjugate(), self.m11.conjugate(),
        )

    def is_finite(self) -> bool:
        return all(cmath.isfinite(z) for z in self)

    def __add__(self, other):  # type: ignore[override]
        return add(self, other)

    def __matmul__(self, other):
        return mul(self, other)


_R = 1.0 / math.sqrt(2.0)


def _gate(a, b, c, d) -> ComplexMatrix2:
    return ComplexMatrix2(complex(a), complex(b), complex(c), complex(d))


GATES: dict[str, ComplexMatrix2] = {
    "H": _gate(_R, _R, _R, -_R),
    "X": _gate(0, 1, 1, 0),
    "Y": _gate(0, -1j, 1j, 0),
    "Z": _gate(1, 0, 0, -1),
    "S": _gate(1, 0, 0, 1j),
    "D": _gate(0, 1, -1, 0),
    "T": _gate(1, 0, 0, cmath.exp(1j * math.pi / 4)),
    "I": _gate(1, 0, 0, 1),
}

GATE_SYMBOLS: tuple[str, ...] = ("H", "X", "Y", "Z", "S", "D", "T", "I")

IDENTITY = GATES["I"]


def gate_matrix(symbol: str) -> ComplexMatrix2:
    try:
        return GATES[symbol]
    except KeyError:
        raise ValueError(f"unknown gate symbol {symbol!r}") from None


def add(a: ComplexMatrix2, b: ComplexMatrix2) -> ComplexMatrix2:
    return ComplexMatrix2(a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3])


def mul(a: ComplexMatrix2, b: ComplexMatrix2) -> ComplexMatrix2:
    """Matrix product ``a @ b``."""
    a00, a01, a10, a11 = a
    b00, b01, b10, b11 = b
    return ComplexMatrix2(
        a00 * b00 + a01 * b10,
        a00 * b01 + a01 * b11,
        a10 * b00 + a11 * b10,
        a10 * b01 + a11 * b11,
    )


def eigenvalues(m: ComplexMatrix2) -> tuple[complex, complex]:
    """Roots of the characteristic polynomial ``l^2 - tr(m) l + det(m)``.

    Uses the principal square root of the discriminant and picks the sign
    that avoids cancellation; the second root comes from Vieta's product.
    The returned order carries no meaning.
    """
    tr = m.trace()
    det = m.det()
    # equals tr^2 - 4 det without the cancellation near repeated roots
    gap = m.m00 - m.m11
    root = cmath.sqrt(gap * gap + 4.0 * m.m01 * m.m10)
    # choose the larger-magnitude numerator to keep both roots accurate
    if abs(tr + root) >= abs(tr - root):
        big = (tr + root) / 2.0
    else:
        big = (tr - root) / 2.0
    if big == 0:
        return 0j, 0j
    return big, det / big


def is_unitary(m: ComplexMatrix2, tol: float = 1e-9) -> bool:
    if tol <= 0:
        raise ValueError("tol must be positive")
    p = mul(m.dagger(), m)
    return all(abs(z - e) <= tol for z, e in zip(p, IDENTITY))
