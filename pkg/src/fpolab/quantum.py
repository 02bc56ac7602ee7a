"""Small-dimension quantum checks: reduced-state spectra, the Clifford test and 1-zigzag gate teleportation."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import DimensionError, NotCliffordError

UNITARY_TOL = 1e-10
POLY_TOL = 1e-8
PAULI_TOL = 1e-9

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


def kron(*ms) -> np.ndarray:
    return reduce(np.kron, ms)


@dataclass(frozen=True, eq=False)
class UnitaryGate:
    """Unitary on A ⊗ B, with outputs C = A and D = B."""

    dims: tuple[int, int]
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if len(self.dims) != 2 or min(self.dims) < 1:
            raise DimensionError(f"need two positive dimensions, got {self.dims}")
        size = self.dims[0] * self.dims[1]
        if m.shape != (size, size):
            raise DimensionError(f"matrix shape {m.shape} does not match dims {self.dims}")
        if not np.allclose(m.conj().T @ m, np.eye(size), atol=UNITARY_TOL, rtol=0):
            raise DimensionError("matrix is not unitary")

    @property
    def size(self) -> int:
        return self.dims[0] * self.dims[1]

    def then(self, other: "UnitaryGate") -> "UnitaryGate":
        """``other`` applied after ``self``."""
        if other.dims != self.dims:
            raise DimensionError("gate dimensions differ")
        return UnitaryGate(self.dims, other.matrix @ self.matrix)

    def to_dict(self) -> dict:
        return {"dims": list(self.dims),
                "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "UnitaryGate":
        try:
            dims = data["dims"]
            rows = data["matrix"]
            mat = np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)
        except (KeyError, TypeError, ValueError) as exc:
            raise DimensionError(f"malformed gate JSON: {exc}") from None
        return cls(tuple(dims), mat)

    @classmethod
    def from_json(cls, text: str) -> "UnitaryGate":
        return cls.from_dict(json.loads(text))


def identity_gate(dims=(2, 2)) -> UnitaryGate:
    return UnitaryGate(dims, np.eye(dims[0] * dims[1]))


def cnot() -> UnitaryGate:
    """Controlled-NOT with control on the first qubit."""
    return UnitaryGate((2, 2), np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]))


def cz() -> UnitaryGate:
    return UnitaryGate((2, 2), np.diag([1, 1, 1, -1]))


def swap() -> UnitaryGate:
    return UnitaryGate((2, 2), np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]))


HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PHASE_S = np.diag([1, 1j])
PHASE_T = np.diag([1, np.exp(1j * np.pi / 4)])


def local_gate(a: np.ndarray, b: np.ndarray = I2) -> UnitaryGate:
    return UnitaryGate((a.shape[0], b.shape[0]), np.kron(a, b))


GATES = {"cnot": cnot, "cz": cz, "swap": swap, "identity": identity_gate}


def named_gate(name: str) -> UnitaryGate:
    try:
        return GATES[name.lower()]()
    except KeyError:
        raise DimensionError(f"unknown gate {name}; known: {', '.join(GATES)}") from None


# states and reduced spectra

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)
STATES = {"0": KET0, "1": KET1, "+": PLUS, "-": MINUS}
BASES = {"zero-plus": ["0", "+"], "computational": ["0", "1"], "zero-one-plus-minus": ["0", "1", "+", "-"]}


def basis_states(name: str) -> list[tuple[str, np.ndarray]]:
    try:
        return [(k, STATES[k]) for k in BASES[name]]
    except KeyError:
        raise DimensionError(f"unknown basis {name}; known: {', '.join(BASES)}") from None


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError("density matrix must be square")
        if not np.allclose(m, m.conj().T, atol=1e-10, rtol=0):
            raise DimensionError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > 1e-10:
            raise DimensionError("density matrix does not have unit trace")
        if np.linalg.eigvalsh(m).min() < -1e-10:
            raise DimensionError("density matrix is not positive semidefinite")

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


@dataclass(frozen=True, eq=False)
class CharPoly:
    """Monic real coefficients, highest degree first."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        if np.iscomplexobj(c):
            if np.abs(c.imag).max(initial=0) > 1e-9:
                raise DimensionError("characteristic polynomial has complex coefficients")
            c = c.real
        c = c.astype(float)
        if abs(c[0] - 1) > 1e-9:
            raise DimensionError("characteristic polynomial is not monic")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __mul__(self, other: "CharPoly") -> np.ndarray:
        return np.polymul(self.coeffs, other.coeffs)


def _unit(v, dim: int) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.shape[0] != dim:
        raise DimensionError(f"state has dimension {v.shape[0]}, expected {dim}")
    if abs(np.linalg.norm(v) - 1) > 1e-10:
        raise DimensionError("state is not normalised")
    return v


def reduced_state(u: UnitaryGate, psi, phi) -> DensityMatrix:
    """State on the first output after applying ``u`` to ``psi ⊗ phi`` and tracing out the second."""
    da, db = u.dims
    out = u.matrix @ np.kron(_unit(psi, da), _unit(phi, db))
    amp = out.reshape(da, db)
    rho = amp @ amp.conj().T
    return DensityMatrix((rho + rho.conj().T) / 2)


def reduced_char_poly(u: UnitaryGate, psi, phi) -> CharPoly:
    eig = reduced_state(u, psi, phi).eigenvalues()
    return CharPoly(np.poly(eig).real)


@dataclass(frozen=True)
class EvcondResult:
    holds: bool
    witness: dict | None = None

    def to_dict(self) -> dict:
        return {"result": "holds" if self.holds else "violated", "witness": self.witness}


def evcond_check(u: UnitaryGate, a_states, b_states, tol: float = POLY_TOL) -> EvcondResult:
    """Check the product identity of reduced characteristic polynomials over all quadruples.

    States are given as vectors or (label, vector) pairs.  A violation
    refutes a two-way-communication implementation of ``u``; "holds" is
    inconclusive.
    """
    a = [s if isinstance(s, tuple) else (str(k), s) for k, s in enumerate(a_states)]
    b = [s if isinstance(s, tuple) else (str(k), s) for k, s in enumerate(b_states)]
    if not a or not b:
        raise DimensionError("state lists must be non-empty")
    poly = {}
    spectra = {}
    for (la, va), (lb, vb) in itertools.product(a, b):
        rho = reduced_state(u, va, vb)
        poly[la, lb] = CharPoly(np.poly(rho.eigenvalues()).real)
        spectra[la + lb] = [float(x) for x in np.sort(rho.eigenvalues())]
    for (l1, _), (l2, _) in itertools.product(a, repeat=2):
        for (k1, _), (k2, _) in itertools.product(b, repeat=2):
            lhs = poly[l1, k1] * poly[l2, k2]
            rhs = poly[l2, k1] * poly[l1, k2]
            if np.abs(lhs - rhs).max() > tol:
                inputs = [l1 + k1, l2 + k2, l2 + k1, l1 + k2]
                mixed = [s for s in dict.fromkeys(inputs) if max(spectra[s]) < 1 - 1e-9]
                return EvcondResult(False, {"psi": l1, "psi2": l2, "phi": k1, "phi2": k2,
                                            "inputs": inputs, "spectra": {s: spectra[s] for s in inputs},
                                            "mixed": mixed})
    return EvcondResult(True)


# Pauli strings and the Clifford test

def pauli_matrix(label: str) -> np.ndarray:
    return kron(*(PAULI[c] for c in label))


def pauli_labels(n: int) -> list[str]:
    return ["".join(p) for p in itertools.product("IXYZ", repeat=n)]


def pauli_decompose(m: np.ndarray, n: int, tol: float = PAULI_TOL) -> tuple[complex, str] | None:
    """``(c, P)`` with ``m = c P`` for a Pauli string ``P`` and ``c`` in {±1, ±i}, else None."""
    dim = 2 ** n
    hits = []
    for label in pauli_labels(n):
        c = np.trace(pauli_matrix(label).conj().T @ m) / dim
        if abs(c) > tol:
            hits.append((c, label))
    if len(hits) != 1:
        return None
    c, label = hits[0]
    for phase in (1, -1, 1j, -1j):
        if abs(c - phase) <= tol:
            return phase, label
    return None


def _qubits(u: UnitaryGate) -> int:
    n = 0
    for d in u.dims:
        if d & (d - 1):
            raise DimensionError(f"dimension {d} is not a power of two")
        n += d.bit_length() - 1
    return n


@dataclass(frozen=True)
class CliffordResult:
    """Conjugation tableau ``label -> (sign, image label)`` or a failing generator."""

    is_clifford: bool
    tableau: dict | None = None
    witness: str | None = None

    def image(self, label: str) -> tuple[int, str]:
        return self.tableau[label]

    def to_dict(self) -> dict:
        if self.is_clifford:
            return {"clifford": True,
                    "tableau": {k: ("-" if s < 0 else "+") + v for k, (s, v) in self.tableau.items()}}
        return {"clifford": False, "witness": self.witness}


def generator_labels(n: int) -> list[str]:
    """Single-qubit X and Z on each qubit, qubit by qubit (XI, ZI, IX, IZ for two qubits)."""
    out = []
    for k in range(n):
        for p in "XZ":
            out.append("I" * k + p + "I" * (n - k - 1))
    return out


def is_clifford_22(u: UnitaryGate) -> CliffordResult:
    n = _qubits(u)
    um, ud = u.matrix, u.matrix.conj().T
    for g in generator_labels(n):
        if pauli_decompose(um @ pauli_matrix(g) @ ud, n) is None:
            return CliffordResult(False, witness=g)
    tableau = {}
    for label in pauli_labels(n):
        phase, image = pauli_decompose(um @ pauli_matrix(label) @ ud, n)
        tableau[label] = (int(round(phase.real)), image)
    return CliffordResult(True, tableau=tableau)


# channels

@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    """``sum_ij |i><j| ⊗ Λ(|i><j|)`` with the input factor first."""

    matrix: np.ndarray
    dim_in: int
    dim_out: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        size = self.dim_in * self.dim_out
        if m.shape != (size, size):
            raise DimensionError(f"Choi matrix shape {m.shape} does not match {self.dim_in}x{self.dim_out}")

    def violations(self, tol: float = 1e-9) -> list[str]:
        out = []
        m = self.matrix
        if not np.allclose(m, m.conj().T, atol=tol, rtol=0):
            out.append("not Hermitian")
        elif np.linalg.eigvalsh(m).min() < -tol:
            out.append("not positive semidefinite")
        t = m.reshape(self.dim_in, self.dim_out, self.dim_in, self.dim_out)
        if not np.allclose(np.einsum("iaja->ij", t), np.eye(self.dim_in), atol=tol, rtol=0):
            out.append("not trace preserving")
        return out


def choi_of_kraus(kraus, dim_in: int, dim_out: int) -> ChoiMatrix:
    total = np.zeros((dim_in * dim_out, dim_in * dim_out), dtype=complex)
    for i in range(dim_in):
        for j in range(dim_in):
            eij = np.zeros((dim_in, dim_in), dtype=complex)
            eij[i, j] = 1
            out = sum(k @ eij @ k.conj().T for k in kraus)
            total += np.kron(eij, out)
    return ChoiMatrix(total, dim_in, dim_out)


def choi_of_unitary(u: UnitaryGate) -> ChoiMatrix:
    return choi_of_kraus([u.matrix], u.size, u.size)


def choi_distance(a: ChoiMatrix, b: ChoiMatrix) -> float:
    if a.matrix.shape != b.matrix.shape:
        raise DimensionError("Choi matrices have different dimensions")
    return float(np.linalg.norm(a.matrix - b.matrix))


def bell_outcome(i: int, j: int) -> np.ndarray:
    """``Z^i X^j``, the Pauli labelling Bell-measurement outcome (i, j)."""
    return np.linalg.matrix_power(Z, i) @ np.linalg.matrix_power(X, j)


PHI = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def zigzag1_kraus(u: UnitaryGate) -> list[np.ndarray]:
    """Kraus operators of the 1-zigzag teleportation of a two-qubit Clifford ``u``.

    The resource is ``(1 ⊗ 1 ⊗ u)`` on Bell pairs (a1, a2) and (b1, b2),
    with ``u`` acting on (a2, b2).  Input A is Bell-measured against a1 and
    input B against b1; both outcomes are broadcast and the outputs a2, b2
    receive the Pauli correction read off the conjugation tableau.
    """
    if u.dims != (2, 2):
        raise DimensionError("zigzag teleportation needs a two-qubit gate")
    cliff = is_clifford_22(u)
    if not cliff.is_clifford:
        raise NotCliffordError(cliff.witness)
    # resource tensor with axes (a1, a2, b1, b2)
    pairs = np.einsum("ij,kl->ikjl", PHI.reshape(2, 2), PHI.reshape(2, 2)).reshape(4, 4)  # (a1 b1), (a2 b2)
    resource = (pairs @ u.matrix.T).reshape(2, 2, 2, 2)  # axes a1, b1, a2, b2
    kraus = []
    for i, j, k, l in itertools.product((0, 1), repeat=4):
        pa, pb = bell_outcome(i, j), bell_outcome(k, l)
        # <Phi| (P^dagger ⊗ 1) on (input, half), written as a matrix over (input, half)
        bra_a = (np.kron(pa.conj().T, I2).conj().T @ PHI).conj().reshape(2, 2)
        bra_b = (np.kron(pb.conj().T, I2).conj().T @ PHI).conj().reshape(2, 2)
        # raw operator from (inA, inB) to (a2, b2)
        raw = np.einsum("xp,yq,pqcd->cdxy", bra_a, bra_b, resource).reshape(4, 4)
        residual = np.kron(pa.conj().T, pb.conj().T)
        _, label = pauli_decompose(residual, 2)
        _, image = cliff.image(label)
        kraus.append(pauli_matrix(image).conj().T @ raw)
    return kraus


def zigzag1_channel(u: UnitaryGate) -> ChoiMatrix:
    return choi_of_kraus(zigzag1_kraus(u), 4, 4)
