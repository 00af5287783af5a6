"""Admissible transformations: outcome-labeled operator collections.

A transformation is a finite map from classical outcome tokens to linear
operators {M_t} obeying the completeness equation sum M_t^dag M_t = I.
Unitaries, initializations and measurements are all special cases; the seven
named primitives used by machine programs are built here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import COMPLETENESS_TOL, PRUNE_EPS
from .states import StateVector, tensor_ops

# Reserved outcome tokens (ASCII renderings).
LAMBDA = "_"  # void outcome of unitary transformations
BLANK = "#"
TOP = "T"
BOT = "F"


def bar(symbol: str) -> str:
    """Non-<symbol> outcome token of a symbol test (e.g. '#' -> '!#')."""
    return "!" + symbol


NONBLANK = bar(BLANK)


def concat_outcomes(a: str, b: str) -> str:
    """Outcome concatenation with the void outcome as unit."""
    if a == LAMBDA:
        return b
    if b == LAMBDA:
        return a
    return a + b


class CompletenessError(ValueError):
    """Operator collection does not resolve the identity."""


@dataclass(frozen=True)
class AdmissibleTransformation:
    """Ordered outcome -> operator map over registers of d-level cells.

    Machine-usable transformations preserve cell count; the arity-changing
    forms (initialization, destructive measurement) exist for completeness of
    the algebra and are rejected by the machine layer.
    """

    name: str
    d: int
    arity_in: int
    arity_out: int
    branches: dict[str, np.ndarray]
    recipe: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if not self.branches:
            raise ValueError("transformation needs at least one branch")
        shape = (self.d**self.arity_out, self.d**self.arity_in)
        fixed = {}
        for outcome, op in self.branches.items():
            op = np.asarray(op, dtype=np.complex128)
            if op.shape != shape:
                raise ValueError(f"{self.name}: branch {outcome!r} has shape {op.shape}, expected {shape}")
            op.flags.writeable = False
            fixed[outcome] = op
        object.__setattr__(self, "branches", fixed)

    @property
    def arity(self) -> int:
        if self.arity_in != self.arity_out:
            raise ValueError(f"{self.name} changes cell count ({self.arity_in} -> {self.arity_out})")
        return self.arity_in

    @property
    def preserves_arity(self) -> bool:
        return self.arity_in == self.arity_out

    def outcomes(self) -> tuple[str, ...]:
        return tuple(self.branches)

    def completeness_defect(self) -> float:
        """Max-entry deviation of sum M^dag M from the identity."""
        dim = self.d**self.arity_in
        acc = np.zeros((dim, dim), dtype=np.complex128)
        for op in self.branches.values():
            acc += op.conj().T @ op
        return float(np.max(np.abs(acc - np.eye(dim))))

    def is_projective(self, tol: float = COMPLETENESS_TOL) -> bool:
        """True when the branches are orthogonal projectors resolving I."""
        if not self.preserves_arity:
            return False
        dim = self.d**self.arity_in
        ops = list(self.branches.values())
        total = np.zeros((dim, dim), dtype=np.complex128)
        for i, p in enumerate(ops):
            if np.max(np.abs(p @ p - p)) > tol or np.max(np.abs(p - p.conj().T)) > tol:
                return False
            for q in ops[i + 1 :]:
                if np.max(np.abs(p @ q)) > tol:
                    return False
            total += p
        return bool(np.max(np.abs(total - np.eye(dim))) <= tol)


@dataclass(frozen=True)
class CompletenessReport:
    passed: bool
    max_deviation: float
    worst_entry: tuple[int, int]


def check_completeness(t: AdmissibleTransformation, tol: float = COMPLETENESS_TOL) -> CompletenessReport:
    dim = t.d**t.arity_in
    acc = np.zeros((dim, dim), dtype=np.complex128)
    for op in t.branches.values():
        acc += op.conj().T @ op
    dev = np.abs(acc - np.eye(dim))
    worst = np.unravel_index(int(np.argmax(dev)), dev.shape)
    return CompletenessReport(bool(dev[worst] <= tol), float(dev[worst]), (int(worst[0]), int(worst[1])))


def require_complete(t: AdmissibleTransformation, tol: float = COMPLETENESS_TOL) -> AdmissibleTransformation:
    rep = check_completeness(t, tol)
    if not rep.passed:
        raise CompletenessError(f"{t.name}: completeness defect {rep.max_deviation:.3e} at entry {rep.worst_entry}")
    return t


# ---------------------------------------------------------------------------
# Named primitives.  Alphabets are ordered symbol tuples; operators index
# cells by symbol position.


def _sym_index(alphabet, symbol: str) -> int:
    try:
        return alphabet.index(symbol)
    except ValueError:
        raise ValueError(f"symbol {symbol!r} not in alphabet {tuple(alphabet)!r}") from None


def std_measurement(alphabet) -> AdmissibleTransformation:
    """Projective measurement in the standard basis; outcomes are the symbols."""
    d = len(alphabet)
    branches = {}
    for i, sym in enumerate(alphabet):
        p = np.zeros((d, d), dtype=np.complex128)
        p[i, i] = 1.0
        branches[sym] = p
    return AdmissibleTransformation("Std", d, 1, 1, branches, recipe=("std",))


def symbol_test(alphabet, symbol: str) -> AdmissibleTransformation:
    """Two-outcome test for one symbol: outcomes symbol and !symbol."""
    d = len(alphabet)
    i = _sym_index(alphabet, symbol)
    hit = np.zeros((d, d), dtype=np.complex128)
    hit[i, i] = 1.0
    miss = np.eye(d, dtype=np.complex128) - hit
    return AdmissibleTransformation(
        f"T[{symbol}]", d, 1, 1, {symbol: hit, bar(symbol): miss}, recipe=("test", symbol)
    )


def blank_test(alphabet) -> AdmissibleTransformation:
    return symbol_test(alphabet, BLANK)


def permutation(alphabet, a: str, b: str) -> AdmissibleTransformation:
    """Unitary exchanging two symbols (identity when a == b); outcome is void."""
    d = len(alphabet)
    ia, ib = _sym_index(alphabet, a), _sym_index(alphabet, b)
    op = np.eye(d, dtype=np.complex128)
    if ia != ib:
        op[[ia, ib]] = op[[ib, ia]]
    return AdmissibleTransformation(f"P[{a},{b}]", d, 1, 1, {LAMBDA: op}, recipe=("perm", a, b))


def swap_cells(alphabet) -> AdmissibleTransformation:
    """Two-cell unitary exchanging the cell states."""
    d = len(alphabet)
    op = np.zeros((d * d, d * d), dtype=np.complex128)
    for x in range(d):
        for y in range(d):
            op[y * d + x, x * d + y] = 1.0
    return AdmissibleTransformation("Swap", d, 2, 2, {LAMBDA: op}, recipe=("swap",))


def unitary(matrix: np.ndarray, d: int, name: str = "U") -> AdmissibleTransformation:
    """Unitary operation as a single-branch transformation with void outcome."""
    matrix = np.asarray(matrix, dtype=np.complex128)
    arity = 0
    while d**arity < matrix.shape[0]:
        arity += 1
    t = AdmissibleTransformation(name, d, arity, arity, {LAMBDA: matrix}, recipe=("unitary", matrix))
    return require_complete(t)


def observable(projectors: dict[str, np.ndarray], d: int, name: str = "O") -> AdmissibleTransformation:
    """Projective measurement from named projector blocks."""
    first = next(iter(projectors.values()))
    arity = 0
    while d**arity < np.asarray(first).shape[0]:
        arity += 1
    t = AdmissibleTransformation(name, d, arity, arity, dict(projectors), recipe=("observable", dict(projectors)))
    require_complete(t)
    if not t.is_projective():
        raise ValueError(f"{name}: blocks are not orthogonal projectors")
    return t


def diagonal_measurement(alphabet, a: str, b: str) -> AdmissibleTransformation:
    """Measurement in the basis diagonal on two symbols.

    Outcomes: T for (|a>+|b>)/sqrt2, F for (|a>-|b>)/sqrt2, and each remaining
    symbol for itself.
    """
    d = len(alphabet)
    ia, ib = _sym_index(alphabet, a), _sym_index(alphabet, b)
    if ia == ib:
        raise ValueError("diagonal measurement needs two distinct symbols")
    plus = np.zeros(d, dtype=np.complex128)
    plus[[ia, ib]] = 1 / np.sqrt(2)
    minus = np.zeros(d, dtype=np.complex128)
    minus[ia], minus[ib] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    branches = {TOP: np.outer(plus, plus.conj()), BOT: np.outer(minus, minus.conj())}
    for i, sym in enumerate(alphabet):
        if i in (ia, ib):
            continue
        p = np.zeros((d, d), dtype=np.complex128)
        p[i, i] = 1.0
        branches[sym] = p
    return AdmissibleTransformation(f"O[{a},{b}]", d, 1, 1, branches, recipe=("diag", a, b))


def initialization(alphabet, symbol: str) -> AdmissibleTransformation:
    """Cell creation in a fixed basis state (0 -> 1 cells)."""
    d = len(alphabet)
    col = np.zeros((d, 1), dtype=np.complex128)
    col[_sym_index(alphabet, symbol), 0] = 1.0
    return AdmissibleTransformation(f"Init[{symbol}]", d, 0, 1, {LAMBDA: col}, recipe=("init", symbol))


def destructive_measurement(alphabet) -> AdmissibleTransformation:
    """Basis measurement that consumes the cell (1 -> 0 cells)."""
    d = len(alphabet)
    branches = {}
    for i, sym in enumerate(alphabet):
        row = np.zeros((1, d), dtype=np.complex128)
        row[0, i] = 1.0
        branches[sym] = row
    return AdmissibleTransformation("Destr", d, 1, 0, branches, recipe=("destructive",))


def identity_transform(d: int, arity: int = 1) -> AdmissibleTransformation:
    return AdmissibleTransformation(
        "I" if arity == 1 else f"I^{arity}", d, arity, arity,
        {LAMBDA: np.eye(d**arity, dtype=np.complex128)}, recipe=("ident", arity),
    )


# ---------------------------------------------------------------------------
# Composition


def compose_sequential(t1: AdmissibleTransformation, t2: AdmissibleTransformation) -> AdmissibleTransformation:
    """Run t1 then t2; outcomes concatenate (void absorbed)."""
    if t1.d != t2.d:
        raise ValueError("alphabet size mismatch")
    if t1.arity_out != t2.arity_in:
        raise ValueError(f"arity mismatch: {t1.name} yields {t1.arity_out} cells, {t2.name} takes {t2.arity_in}")
    branches: dict[str, np.ndarray] = {}
    for o1, m in t1.branches.items():
        for o2, nmat in t2.branches.items():
            label = concat_outcomes(o1, o2)
            if label in branches:
                raise ValueError(f"outcome collision {label!r} composing {t1.name};{t2.name}")
            branches[label] = nmat @ m
    return AdmissibleTransformation(
        f"{t1.name};{t2.name}", t1.d, t1.arity_in, t2.arity_out, branches, recipe=("seq", t1, t2)
    )


def compose_spatial(t1: AdmissibleTransformation, t2: AdmissibleTransformation) -> AdmissibleTransformation:
    """Side-by-side composite [t1, t2]; t1 on the leading cells."""
    if t1.d != t2.d:
        raise ValueError("alphabet size mismatch")
    branches: dict[str, np.ndarray] = {}
    for o1, m in t1.branches.items():
        for o2, nmat in t2.branches.items():
            label = concat_outcomes(o1, o2)
            if label in branches:
                raise ValueError(f"outcome collision {label!r} composing [{t1.name},{t2.name}]")
            branches[label] = tensor_ops(m, nmat)
    return AdmissibleTransformation(
        f"[{t1.name},{t2.name}]", t1.d, t1.arity_in + t2.arity_in, t1.arity_out + t2.arity_out,
        branches, recipe=("comp", t1, t2),
    )


def embed_on_cells(op: np.ndarray, targets, register_size: int, d: int) -> np.ndarray:
    """Lift a k-cell operator to a full register, identity off the targets.

    Built by index bookkeeping, never by chained Kronecker products with
    explicit identities.
    """
    k = len(targets)
    if len(set(targets)) != k:
        raise ValueError("duplicate target cells")
    if any(t < 0 or t >= register_size for t in targets):
        raise ValueError("target cell out of range")
    if op.shape != (d**k, d**k):
        raise ValueError(f"operator shape {op.shape} does not address {k} cells")
    dim = d**register_size
    from .config import amplitude_cap

    if dim > amplitude_cap():
        from .states import RegisterCapError

        raise RegisterCapError(f"embedding needs {dim}x{dim} matrix (cap {amplitude_cap()})")
    strides = d ** np.arange(register_size - 1, -1, -1, dtype=np.int64)
    tgt = list(targets)
    rest = [i for i in range(register_size) if i not in set(tgt)]
    from functools import reduce

    def offsets(cells):
        if not cells:
            return np.zeros(1, dtype=np.int64)
        return reduce(np.add.outer, [np.arange(d, dtype=np.int64) * strides[c] for c in cells]).ravel()

    toffs = offsets(tgt)
    roffs = offsets(rest)
    out = np.zeros((dim, dim), dtype=np.complex128)
    rows = toffs[:, None] + roffs[None, :]
    cols = toffs[:, None] + roffs[None, :]
    for a in range(d**k):
        for b in range(d**k):
            out[rows[a], cols[b]] = op[a, b]
    return out


# ---------------------------------------------------------------------------
# Applying to states


def apply_branching(
    state: StateVector, targets, t: AdmissibleTransformation, prune_eps: float = PRUNE_EPS
) -> list[tuple[str, StateVector, float]]:
    """All outcomes of applying t to the target cells, with post-states.

    Branches with probability <= prune_eps are dropped; the surviving
    probabilities are NOT rescaled.  Probabilities over all branches sum to 1
    (within tolerance) for a complete transformation.
    """
    if not t.preserves_arity:
        raise ValueError(f"{t.name} changes cell count; cannot apply in place")
    if t.d != state.d:
        raise ValueError("alphabet size mismatch")
    if len(targets) != t.arity:
        raise ValueError(f"{t.name} needs {t.arity} target cells, got {len(targets)}")
    results = []
    total = 0.0
    for outcome, op in t.branches.items():
        raw = state.apply(op, targets)
        p = float(np.vdot(raw, raw).real)
        total += p
        if p > prune_eps:
            results.append((outcome, StateVector(state.d, state.n, raw / np.sqrt(p)), p))
    if abs(total - 1.0) > 1e-9:
        raise CompletenessError(f"{t.name}: branch probabilities sum to {total}")
    return results


def sample_branch(branches, rng: np.random.Generator):
    """Pick one branch by inverse CDF over the deterministic branch order.

    ``branches`` is a list of (outcome, state, probability); probabilities are
    renormalized to absorb pruning before drawing.
    """
    if not branches:
        raise ValueError("no branches to sample")
    probs = np.array([p for _, _, p in branches])
    total = probs.sum()
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"branch probabilities sum to {total}")
    u = rng.random() * total
    acc = 0.0
    for outcome, state, p in branches:
        acc += p
        if u <= acc:
            return outcome, state
    return branches[-1][0], branches[-1][1]
