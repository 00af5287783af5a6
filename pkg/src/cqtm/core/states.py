"""Pure states of a register of d-level cells, plus basic state algebra."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import NORM_TOL, SCHMIDT_TOL, amplitude_cap
from .kernels import apply_to_targets


class RegisterCapError(ValueError):
    """Register would exceed the configured amplitude cap."""


def _check_cap(d: int, n: int) -> int:
    size = d**n
    cap = amplitude_cap()
    if size > cap:
        raise RegisterCapError(f"register of {n} cells over alphabet {d} needs {size} amplitudes (cap {cap})")
    return size


@dataclass(frozen=True)
class StateVector:
    """Normalized amplitudes over basis strings of n cells with d symbols each.

    Index order: cell 0 is the most significant base-d digit.  n = 0 is the
    scalar state with a single amplitude.  Amplitudes are stored exactly
    normalized and read-only.
    """

    d: int
    n: int
    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.d < 1 or self.n < 0:
            raise ValueError("need d >= 1 and n >= 0")
        size = _check_cap(self.d, self.n)
        amps = np.asarray(self.amps, dtype=np.complex128).reshape(-1)
        if amps.size != size:
            raise ValueError(f"expected {size} amplitudes, got {amps.size}")
        if not np.all(np.isfinite(amps.view(np.float64))):
            raise ValueError("non-finite amplitude")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm} outside tolerance {NORM_TOL}")
        amps = amps / norm
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_amplitudes(cls, d: int, amps, norm_tol: float | None = None) -> "StateVector":
        """Build from raw amplitudes, rescaling if within norm_tol (None = always)."""
        amps = np.asarray(amps, dtype=np.complex128).reshape(-1)
        n = 0
        while d**n < amps.size:
            n += 1
        if d**n != amps.size:
            raise ValueError(f"amplitude count {amps.size} is not a power of {d}")
        norm = float(np.linalg.norm(amps))
        if norm == 0.0:
            raise ValueError("zero state")
        if norm_tol is not None and abs(norm - 1.0) > norm_tol:
            raise ValueError(f"state norm {norm} outside tolerance {norm_tol}")
        return cls(d, n, amps / norm)

    @classmethod
    def basis(cls, d: int, n: int, index: int) -> "StateVector":
        size = _check_cap(d, n)
        amps = np.zeros(size, dtype=np.complex128)
        amps[index] = 1.0
        return cls(d, n, amps)

    @classmethod
    def scalar(cls, d: int) -> "StateVector":
        return cls.basis(d, 0, 0)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def apply(self, op: np.ndarray, targets) -> np.ndarray:
        """Raw (unnormalized) amplitudes after applying op to the target cells."""
        return apply_to_targets(self.amps, op, list(targets), self.d, self.n)

    def insert_cell(self, position: int, cell_amps: np.ndarray) -> "StateVector":
        """Tensor a fresh single-cell state in at the given register slot."""
        if not 0 <= position <= self.n:
            raise ValueError(f"bad insert position {position}")
        left = self.d**position
        right = self.d ** (self.n - position)
        block = self.amps.reshape(left, 1, right) * np.asarray(cell_amps, dtype=np.complex128).reshape(1, self.d, 1)
        return StateVector(self.d, self.n + 1, block.reshape(-1))

    def canonical_phase(self) -> "StateVector":
        """Rotate the global phase so the largest-magnitude amplitude is real positive."""
        idx = int(np.argmax(np.abs(self.amps)))
        pivot = self.amps[idx]
        if abs(pivot) == 0.0:
            return self
        return StateVector(self.d, self.n, self.amps * (abs(pivot) / pivot))


def tensor_states(a: StateVector, b: StateVector) -> StateVector:
    """Joint state with a's cells on the most significant side."""
    if a.d != b.d:
        raise ValueError("alphabet size mismatch")
    _check_cap(a.d, a.n + b.n)
    return StateVector(a.d, a.n + b.n, np.kron(a.amps, b.amps))


def tensor_ops(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with a on the most significant cells."""
    out_rows = a.shape[0] * b.shape[0]
    out_cols = a.shape[1] * b.shape[1]
    if max(out_rows, out_cols) > amplitude_cap():
        raise RegisterCapError(f"operator of shape ({out_rows}, {out_cols}) exceeds cap")
    return np.kron(a, b)


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2: equality up to global phase scores 1."""
    if (a.d, a.n) != (b.d, b.n):
        raise ValueError(f"shape mismatch: {(a.d, a.n)} vs {(b.d, b.n)}")
    return float(abs(np.vdot(a.amps, b.amps)) ** 2)


def schmidt_values(state: StateVector, cells) -> np.ndarray:
    """Singular values of the amplitude matrix for the given cell subset."""
    cells = sorted(set(cells))
    if not cells or len(cells) >= state.n:
        raise ValueError("bipartition must be a nonempty proper cell subset")
    view = state.amps.reshape((state.d,) * state.n)
    moved = np.moveaxis(view, cells, range(len(cells)))
    mat = moved.reshape(state.d ** len(cells), -1)
    return np.linalg.svd(mat, compute_uv=False)


def entanglement_profile(state: StateVector, cells) -> tuple[int, float]:
    """(Schmidt rank, purity of the reduced state) across the bipartition."""
    sv = schmidt_values(state, cells)
    rank = int(np.sum(sv > SCHMIDT_TOL))
    purity = float(np.sum(sv**4))
    return rank, purity


def factor_out(state: StateVector, cells) -> tuple[StateVector, float]:
    """Pure state of the cell subset plus the top Schmidt weight.

    Only meaningful when the subset is (near-)unentangled from the rest;
    the caller decides what weight counts as pure enough.
    """
    cells = sorted(set(cells))
    if len(cells) == state.n:
        return state, 1.0
    view = state.amps.reshape((state.d,) * state.n)
    moved = np.moveaxis(view, cells, range(len(cells)))
    mat = moved.reshape(state.d ** len(cells), -1)
    u, sv, _ = np.linalg.svd(mat, full_matrices=False)
    part = StateVector(state.d, len(cells), u[:, 0] * np.sign(sv[0] + 1e-300))
    return part.canonical_phase(), float(sv[0] ** 2)
