"""Exact algebra of multi-qubit Pauli strings and Majorana monomials.

Pauli strings are stored in the symplectic binary representation: an n-qubit
string is a pair of n-bit masks ``(x_bits, z_bits)`` where qubit ``i`` carries
an X factor iff bit ``i`` of ``x_bits`` is set, a Z factor iff bit ``i`` of
``z_bits`` is set, and a Y factor iff both are set.  The stored object is the
canonical Hermitian string with letters I/X/Y/Z and no phase; products return
their phase explicitly.  Commutation is a popcount parity of the symplectic
form, so predicates never touch dense matrices.

Majorana monomials chi_S = chi_{i1} ... chi_{ik} (i1 < ... < ik) are stored as
an occupation mask over n modes.  Dense realization uses the Jordan-Wigner
embedding, fixed once and for all as

    chi_{2j-1} = Z^(j-1) X_j,    chi_{2j} = Z^(j-1) Y_j     (1-based j),

which satisfies chi_i chi_j + chi_j chi_i = 2 delta_ij.  Any embedding with
the Clifford relations would do; fixing one keeps tests deterministic.
Results are embedding-invariant up to unitary conjugation.

Site indices are 0-based everywhere in code; the text encodings used for
serialization ("X1 Z3", "M1 M2 M5 M6") are 1-based.

Dense realizations are plain complex numpy arrays.  Qubit 0 is the leftmost
kron factor (most significant bit of the basis index).  The dense qubit limit
defaults to 12 (4096-dimensional) and can be overridden with the
``DISSIP_DENSE_LIMIT`` environment variable.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import reduce
from typing import Union

import numpy as np

from .errors import CapacityError, DimensionMismatchError, ValidationError

DENSE_LIMIT_ENV = "DISSIP_DENSE_LIMIT"
DEFAULT_DENSE_QUBIT_LIMIT = 12

PHASES = (1 + 0j, 1j, -1 + 0j, -1j)  # i**e for e = 0,1,2,3

PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}


def dense_qubit_limit() -> int:
    """Current dense-matrix qubit cap (env override, default 12)."""
    return int(os.environ.get(DENSE_LIMIT_ENV, DEFAULT_DENSE_QUBIT_LIMIT))


def _check_dense_capacity(qubits: int, limit: int | None) -> None:
    cap = dense_qubit_limit() if limit is None else limit
    if qubits > cap:
        raise CapacityError(
            f"dense realization needs {qubits} qubits, over the limit of {cap} "
            f"(override with {DENSE_LIMIT_ENV})"
        )


@dataclass(frozen=True)
class PauliString:
    """Canonical n-qubit Pauli string, phase-free, in symplectic bit form."""

    n: int
    x_bits: int
    z_bits: int

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"qubit count must be positive, got {self.n}")
        mask = (1 << self.n) - 1
        if self.x_bits & ~mask or self.z_bits & ~mask:
            raise ValidationError("bit masks exceed the qubit count")

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0)

    @classmethod
    def from_site_letters(cls, n: int, site_letters) -> "PauliString":
        """Build from (site, letter) pairs, e.g. [(0, 'X'), (2, 'Z')]."""
        x = z = 0
        for site, letter in site_letters:
            if not 0 <= site < n:
                raise ValidationError(f"site {site} outside [0, {n})")
            xb, zb = _LETTER_BITS[letter]
            if (x | z) & (1 << site) and letter != "I":
                raise ValidationError(f"site {site} assigned twice")
            x |= xb << site
            z |= zb << site
        return cls(n, x, z)

    def letter(self, site: int) -> str:
        return _BITS_LETTER[(self.x_bits >> site) & 1, (self.z_bits >> site) & 1]

    @property
    def weight(self) -> int:
        return (self.x_bits | self.z_bits).bit_count()

    def support(self) -> frozenset:
        occ = self.x_bits | self.z_bits
        return frozenset(i for i in range(self.n) if (occ >> i) & 1)

    @property
    def is_identity(self) -> bool:
        return self.x_bits == 0 and self.z_bits == 0

    def __str__(self) -> str:
        return encode_op(self)


@dataclass(frozen=True)
class MajoranaMonomial:
    """Product chi_{i1}...chi_{ik} over n Majorana modes, factors ascending.

    ``occ`` is the mode occupation mask; no phase is stored.  The canonical
    Hermitian normalization of an even-weight Hamiltonian term is
    (i)^(k/2) chi_S, supplied by :func:`canonical_phase`.
    """

    n: int
    occ: int

    def __post_init__(self):
        if self.n < 2 or self.n % 2:
            raise ValidationError(f"Majorana mode count must be even and >= 2, got {self.n}")
        if self.occ & ~((1 << self.n) - 1):
            raise ValidationError("occupation mask exceeds the mode count")

    @classmethod
    def identity(cls, n: int) -> "MajoranaMonomial":
        return cls(n, 0)

    @classmethod
    def from_modes(cls, n: int, modes) -> "MajoranaMonomial":
        occ = 0
        for i in modes:
            if not 0 <= i < n:
                raise ValidationError(f"mode {i} outside [0, {n})")
            if (occ >> i) & 1:
                raise ValidationError(f"mode {i} repeated")
            occ |= 1 << i
        return cls(n, occ)

    @property
    def weight(self) -> int:
        return self.occ.bit_count()

    @property
    def even_weight(self) -> bool:
        return self.weight % 2 == 0

    def modes(self) -> tuple:
        return tuple(i for i in range(self.n) if (self.occ >> i) & 1)

    def support(self) -> frozenset:
        return frozenset(self.modes())

    @property
    def is_identity(self) -> bool:
        return self.occ == 0

    def __str__(self) -> str:
        return encode_op(self)


Term = Union[PauliString, MajoranaMonomial]


def _require_same_n(a, b):
    if a.n != b.n:
        raise DimensionMismatchError(f"operands act on {a.n} vs {b.n} sites")


def pauli_mul(a: PauliString, b: PauliString) -> tuple[PauliString, complex]:
    """Product of two Pauli strings.

    Returns ``(c, phase)`` with dense(a) @ dense(b) == phase * dense(c) and
    phase in {1, i, -1, -i}.  Writing each canonical letter as
    i^(x.z) X^x Z^z, the i-exponent of the product accumulates per site as
    x1 z1 + x2 z2 - x3 z3 + 2 z1 x2 (mod 4).
    """
    _require_same_n(a, b)
    x3 = a.x_bits ^ b.x_bits
    z3 = a.z_bits ^ b.z_bits
    e = (
        (a.x_bits & a.z_bits).bit_count()
        + (b.x_bits & b.z_bits).bit_count()
        - (x3 & z3).bit_count()
        + 2 * (a.z_bits & b.x_bits).bit_count()
    ) % 4
    return PauliString(a.n, x3, z3), PHASES[e]


def pauli_commutes(a: PauliString, b: PauliString) -> int:
    """0 if the strings commute, 1 if they anticommute (symplectic parity)."""
    _require_same_n(a, b)
    return ((a.x_bits & b.z_bits).bit_count() + (a.z_bits & b.x_bits).bit_count()) % 2


def majorana_commutes(a: MajoranaMonomial, b: MajoranaMonomial) -> int:
    """0 if chi_S chi_T = chi_T chi_S, 1 if they anticommute.

    Reordering gives chi_S chi_T = (-1)^(|S||T| - |S cap T|) chi_T chi_S,
    so the flag is the parity of |S||T| + |S cap T|.
    """
    _require_same_n(a, b)
    overlap = (a.occ & b.occ).bit_count()
    return (a.weight * b.weight + overlap) % 2


def jordan_wigner(mode: int, n_modes: int) -> PauliString:
    """Single Majorana chi_mode (0-based) as a Pauli string on n_modes/2 qubits."""
    if n_modes % 2:
        raise ValidationError("Jordan-Wigner needs an even mode count")
    if not 0 <= mode < n_modes:
        raise ValidationError(f"mode {mode} outside [0, {n_modes})")
    q = n_modes // 2
    j = mode // 2
    x = 1 << j
    z = (1 << j) - 1  # Z ladder on qubits 0..j-1
    if mode % 2:  # odd modes carry Y = XZ on the target qubit
        z |= 1 << j
    return PauliString(q, x, z)


def majorana_to_pauli(mono: MajoranaMonomial) -> tuple[PauliString, complex]:
    """Pauli string and phase with dense(mono) == phase * dense(pauli)."""
    acc = PauliString.identity(mono.n // 2)
    phase = 1 + 0j
    for i in mono.modes():
        acc, p = pauli_mul(acc, jordan_wigner(i, mono.n))
        phase *= p
    return acc, phase


def canonical_phase(term: Term) -> complex:
    """Global phase making the term Hermitian with square +I.

    Pauli strings and single Majoranas need none; an even-weight Majorana
    monomial takes (i)^(k/2).
    """
    if isinstance(term, PauliString):
        return 1 + 0j
    k = term.weight
    if k % 2 == 0:
        return 1j ** (k // 2)
    if k == 1:
        return 1 + 0j
    raise ValidationError(f"no Hermitian normalization fixed for odd weight {k} > 1")


def support(term: Term) -> frozenset:
    """Set of site (qubit or mode) indices the term acts on nontrivially."""
    return term.support()


def _parity_vector(mask: int, size: int) -> np.ndarray:
    """parity(popcount(b & mask)) for b = 0..size-1, by xor-folding."""
    v = np.arange(size, dtype=np.uint64) & np.uint64(mask)
    for shift in (32, 16, 8, 4, 2, 1):
        v ^= v >> np.uint64(shift)
    return (v & np.uint64(1)).astype(np.int64)


def _pauli_action(p: PauliString) -> tuple[np.ndarray, np.ndarray]:
    """Column action of the canonical string: P|b> = vals[b] |rows[b]>.

    Qubit i maps to bit position (n-1-i) of the basis index, so qubit 0 is
    the leftmost kron factor.
    """
    q = p.n
    size = 1 << q
    xm = zm = 0
    for site in range(q):
        pos = q - 1 - site
        xm |= ((p.x_bits >> site) & 1) << pos
        zm |= ((p.z_bits >> site) & 1) << pos
    cols = np.arange(size)
    rows = cols ^ xm
    phase = PHASES[(p.x_bits & p.z_bits).bit_count() % 4]
    vals = phase * (1.0 - 2.0 * _parity_vector(zm, size))
    return rows, vals


def term_action(term: Term, global_phase: complex = 1.0, limit: int | None = None):
    """Column action (rows, vals) of global_phase * term: M[rows[c], c] = vals[c].

    Every Pauli string or Majorana monomial is a permutation-with-phases
    matrix, so this O(2^q) form is enough to build or accumulate dense
    realizations without materializing intermediates.
    """
    if isinstance(term, MajoranaMonomial):
        pauli, phase = majorana_to_pauli(term)
        return term_action(pauli, global_phase * phase, limit=limit)
    _check_dense_capacity(term.n, limit)
    rows, vals = _pauli_action(term)
    return rows, global_phase * vals


def to_dense(term: Term, global_phase: complex = 1.0, limit: int | None = None) -> np.ndarray:
    """Dense matrix global_phase * term on the full 2^q space.

    q equals the qubit count for Pauli strings and half the mode count
    (via Jordan-Wigner) for Majorana monomials.
    """
    rows, vals = term_action(term, global_phase, limit=limit)
    size = rows.shape[0]
    out = np.zeros((size, size), dtype=complex)
    out[rows, np.arange(size)] = vals
    return out


def canonical_dense(term: Term, limit: int | None = None) -> np.ndarray:
    """Dense matrix of the Hermitian, unit-square normalization of the term."""
    return to_dense(term, canonical_phase(term), limit=limit)


def kron_chain(letters) -> np.ndarray:
    """Explicit kron product of single-qubit letters; independent oracle for tests."""
    return reduce(np.kron, (PAULI_1Q[c] for c in letters))


def encode_op(term: Term) -> str:
    """Text encoding: 'X1 Z3' for Paulis, 'M1 M2 M5 M6' for Majoranas (1-based)."""
    if isinstance(term, PauliString):
        parts = [f"{term.letter(i)}{i + 1}" for i in sorted(term.support())]
    else:
        parts = [f"M{i + 1}" for i in term.modes()]
    return " ".join(parts) if parts else "I"


def decode_op(text: str, n: int, fermionic: bool) -> Term:
    """Inverse of :func:`encode_op` given the site count and family."""
    text = text.strip()
    if text == "I":
        return MajoranaMonomial.identity(n) if fermionic else PauliString.identity(n)
    if fermionic:
        modes = []
        for part in text.split():
            if not part.startswith("M"):
                raise ValidationError(f"bad Majorana factor {part!r}")
            modes.append(int(part[1:]) - 1)
        return MajoranaMonomial.from_modes(n, modes)
    pairs = []
    for part in text.split():
        letter, site = part[0], int(part[1:]) - 1
        if letter not in ("X", "Y", "Z"):
            raise ValidationError(f"bad Pauli letter in {part!r}")
        pairs.append((site, letter))
    return PauliString.from_site_letters(n, pairs)
