"""The equivariant regulator matrix and its character minors.

``build_regulator`` assembles, from an ingested table of Neron-Tate heights
over F, the square matrix over the complex group algebra whose
((u,k),(t,j)) entry is

    (1/|H_u|) * sum over cosets tau of H_u of  <tau P_(u,k), P*_(t,j)>_F (tau e_{H_u}),

rows and columns ordered lexicographically by (level, index).  Character
minors of three matrices drive the verification criteria:

* the lower minor of the regulator matrix (numeric): determinant of the
  character image of the submatrix with both levels >= level(chi),
* the upper minor of the diagonal filtration matrix (exact): the product
  prod_{t < level(chi)} (chi(sigma)^(p^t) - 1)^(m_t),
* the lower minor of an integral transition matrix supplied with the input
  (exact), which must be a unit at the prime above p for every character.

Empty minors are 1 by convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from .cyclotomic import DEFAULT_PRECISION, BigComplex, CycNum, valuation_above_p
from .groupring import Character, GroupRingElt, char_eval
from .shapes import PermutationShape

__all__ = [
    "HeightTable",
    "RegulatorMatrix",
    "ExtensionMatrix",
    "InvalidTransitionMatrixError",
    "RegulatorDegenerateError",
    "point_indices",
    "build_regulator",
    "regulator_minor",
    "filtration_minor",
    "extension_minor",
]


class RegulatorDegenerateError(ArithmeticError):
    """A character minor of the regulator matrix is numerically singular."""


class InvalidTransitionMatrixError(ValueError):
    """The supplied transition matrix violates its block shape or unit property."""


def point_indices(shape: PermutationShape) -> list[tuple[int, int]]:
    """Lexicographic list of point labels (t, j), j = 1..m_t."""
    return [(t, j) for t in range(shape.group.n + 1) for j in range(1, shape[t] + 1)]


@dataclass(frozen=True)
class HeightTable:
    """Ingested pairing values <tau P_row, P*_col>_F as exact decimal rationals.

    ``entries[(row, tau, col)]`` with row = (u, k), col = (t, j) and tau an
    exponent 0 <= tau < p^u labelling the coset sigma^tau H_u.  ``digits`` is
    the precision the producer declared for the decimal strings.
    """

    shape: PermutationShape
    digits: int
    entries: dict[tuple[tuple[int, int], int, tuple[int, int]], Fraction]

    def validate(self) -> None:
        p = self.shape.group.p
        expected = {
            (row, tau, col)
            for row in point_indices(self.shape)
            for tau in range(p ** row[0])
            for col in point_indices(self.shape)
        }
        got = set(self.entries.keys())
        missing = expected - got
        if missing:
            raise ValueError(f"height table is missing entries, e.g. {sorted(missing)[0]}")
        extra = got - expected
        if extra:
            raise ValueError(f"height table has unexpected entries, e.g. {sorted(extra)[0]}")


@dataclass(frozen=True)
class RegulatorMatrix:
    """Square matrix over C[G]; each entry is a length-|G| coefficient vector."""

    shape: PermutationShape
    precision: int
    entries: tuple[tuple[tuple[mpmath.mpc, ...], ...], ...]

    @property
    def size(self) -> int:
        return len(self.entries)

    def component_deviation(self) -> mpmath.mpf:
        """Largest coefficient of (1 - e_{H_u}) * entry over all entries.

        Each entry must lie in its e_{H_u}-component, so this measures
        ingestion noise only.
        """
        group = self.shape.group
        order = group.order
        with mpmath.workprec(self.precision + 16):
            worst = mpmath.mpf(0)
            for (u, _), row in zip(point_indices(self.shape), self.entries):
                size_h = group.subgroup_order(u)
                step = group.p**u
                for vec in row:
                    # average over H_u-translates; e_{H_u}-component iff invariant
                    for start in range(step):
                        coset = [vec[(start + k * step) % order] for k in range(size_h)]
                        mean = sum(coset, mpmath.mpc(0)) / size_h
                        for c in coset:
                            worst = max(worst, abs(c - mean))
            return worst


def build_regulator(table: HeightTable, precision: int = DEFAULT_PRECISION) -> RegulatorMatrix:
    table.validate()
    shape = table.shape
    group = shape.group
    order = group.order
    idx = point_indices(shape)
    rows = []
    with mpmath.workprec(precision + 16):
        for row in idx:
            u = row[0]
            size_h = group.subgroup_order(u)
            row_entries = []
            for col in idx:
                vec = [mpmath.mpc(0)] * order
                # coefficient at sigma^gamma of tau * e_{H_u} is 1/|H_u| on the coset
                for tau in range(group.p**u):
                    h = table.entries[(row, tau, col)]
                    val = mpmath.mpf(h.numerator) / h.denominator / (size_h * size_h)
                    for k in range(size_h):
                        vec[(tau + k * group.p**u) % order] += val
                row_entries.append(tuple(vec))
            rows.append(tuple(row_entries))
    return RegulatorMatrix(shape, precision, tuple(rows))


def _character_image(matrix: RegulatorMatrix, chi: Character, keep: Sequence[int]) -> list[list[mpmath.mpc]]:
    order = matrix.shape.group.order
    with mpmath.workprec(matrix.precision + 16):
        roots = [mpmath.expjpi(mpmath.mpf(2 * ((k * chi.index) % order)) / order) for k in range(order)]
        out = []
        for i in keep:
            row = []
            for j in keep:
                vec = matrix.entries[i][j]
                row.append(sum((vec[k] * roots[k] for k in range(order)), mpmath.mpc(0)))
            out.append(row)
        return out


def _complex_det(rows: list[list[mpmath.mpc]], precision: int) -> mpmath.mpc:
    n = len(rows)
    if n == 0:
        return mpmath.mpc(1)
    a = [row[:] for row in rows]
    with mpmath.workprec(precision + 16):
        det = mpmath.mpc(1)
        for col in range(n):
            pivot = max(range(col, n), key=lambda r: abs(a[r][col]))
            if abs(a[pivot][col]) == 0:
                return mpmath.mpc(0)
            if pivot != col:
                a[col], a[pivot] = a[pivot], a[col]
                det = -det
            det *= a[col][col]
            inv = 1 / a[col][col]
            for r in range(col + 1, n):
                f = a[r][col] * inv
                if f != 0:
                    for c in range(col, n):
                        a[r][c] -= f * a[col][c]
        return det


def regulator_minor(matrix: RegulatorMatrix, chi: Character, shape: PermutationShape) -> BigComplex:
    """Lower character minor: det of chi applied to the submatrix with both
    point levels >= level(chi); an empty minor is 1."""
    idx = point_indices(shape)
    keep = [i for i, (t, _) in enumerate(idx) if t >= chi.level]
    image = _character_image(matrix, chi, keep)
    det = _complex_det(image, matrix.precision)
    return BigComplex.from_mpc(det, matrix.precision)


def filtration_minor(shape: PermutationShape, chi: Character) -> CycNum:
    """Upper minor of the diagonal matrix with sigma^(p^t) - 1 at level t:
    prod_{t < level} (chi(sigma^(p^t)) - 1)^(m_t), exactly; empty product is 1.

    The product of binomials is expanded sparsely (at most 2^(sum m_t) terms)
    and reduced once, which keeps the full valuation-identity sweep cheap
    even at conductor 7^3.
    """
    if chi.level == 0:
        return CycNum.one()
    order = chi.order
    p = shape.group.p
    terms: dict[int, Fraction] = {0: Fraction(1)}
    for t in range(chi.level):
        e = (chi.reduced_index * p**t) % order
        for _ in range(shape[t]):
            new: dict[int, Fraction] = {}
            for k, c in terms.items():
                shifted = (k + e) % order
                new[shifted] = new.get(shifted, Fraction(0)) + c
                new[k] = new.get(k, Fraction(0)) - c
            terms = new
    vec = [Fraction(0)] * order
    for k, c in terms.items():
        vec[k] += c
    return CycNum(order, vec)


class ExtensionMatrix:
    """Integral group-ring matrix representing the extension class.

    Block shape: point labels with level < n in the leading block, labels at
    level n trailing; the trailing diagonal block must be the identity and
    the off-diagonal blocks zero.
    """

    def __init__(self, shape: PermutationShape, entries: Sequence[Sequence[GroupRingElt]]):
        self.shape = shape
        idx = point_indices(shape)
        k = len(idx)
        if len(entries) != k or any(len(r) != k for r in entries):
            raise InvalidTransitionMatrixError(f"matrix must be {k}x{k}")
        self.entries = [list(r) for r in entries]
        n = shape.group.n
        one = GroupRingElt.one(shape.group)
        zero = GroupRingElt.zero(shape.group)
        for i, (ti, _) in enumerate(idx):
            for j, (tj, _) in enumerate(idx):
                e = self.entries[i][j]
                if not e.is_p_integral():
                    raise InvalidTransitionMatrixError("entries must be p-integral")
                if ti == n or tj == n:
                    want = one if i == j else zero
                    if (ti == n and tj == n and e != want) or (ti != tj and (ti == n or tj == n) and e != zero):
                        raise InvalidTransitionMatrixError(
                            "bottom block must be the identity with zero off-diagonal blocks"
                        )

    @classmethod
    def identity(cls, shape: PermutationShape) -> "ExtensionMatrix":
        idx = point_indices(shape)
        one = GroupRingElt.one(shape.group)
        zero = GroupRingElt.zero(shape.group)
        return cls(shape, [[one if i == j else zero for j in range(len(idx))] for i in range(len(idx))])

    def is_identity(self) -> bool:
        idx = point_indices(self.shape)
        one = GroupRingElt.one(self.shape.group)
        zero = GroupRingElt.zero(self.shape.group)
        return all(
            self.entries[i][j] == (one if i == j else zero)
            for i in range(len(idx))
            for j in range(len(idx))
        )

    def augmentation_determinant(self) -> Fraction:
        """det of the matrix of augmentations (the trivial-character image)."""
        rows = [[CycNum.rational(e.augmentation()) for e in row] for row in self.entries]
        return _cyc_det(rows).as_rational()


def _cyc_det(rows: list[list[CycNum]]) -> CycNum:
    n = len(rows)
    if n == 0:
        return CycNum.one()
    m = max(e.m for row in rows for e in row)
    a = [[e.lift(m) if e.m != m else e for e in row] for row in rows]
    det = CycNum.one(m)
    for col in range(n):
        pivot = None
        for r in range(col, n):
            if a[r][col]:
                pivot = r
                break
        if pivot is None:
            return CycNum.zero(m)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        det = det * a[col][col]
        inv = a[col][col].inverse()
        for r in range(col + 1, n):
            if a[r][col]:
                f = a[r][col] * inv
                for c in range(col, n):
                    a[r][c] = a[r][c] - f * a[col][c]
    return det


def extension_minor(matrix: ExtensionMatrix, chi: Character, *, check_unit: bool = True) -> CycNum:
    """Lower character minor of the transition matrix, exactly.

    Must be a p-adic unit for every character; a non-unit means the supplied
    matrix cannot represent the extension class and is reported as invalid.
    """
    shape = matrix.shape
    idx = point_indices(shape)
    keep = [i for i, (t, _) in enumerate(idx) if t >= chi.level]
    rows = [[char_eval(matrix.entries[i][j], chi) for j in keep] for i in keep]
    det = _cyc_det(rows)
    if check_unit:
        v = valuation_above_p(det, shape.group.p)
        if v != 0:
            raise InvalidTransitionMatrixError(
                f"character minor at index {chi.index} has valuation {v}, not a unit"
            )
    return det
