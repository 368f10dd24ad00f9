"""Builders and audits for the swap-test circuit family.

Circuits are plain gate lists over a fixed register layout:

    [top ancilla?][mid ancillas][input register 1]...[input register n]

Each input register is ``w`` qubits wide; a controlled register swap expands
to ``w`` CSWAPs, one per qubit position, so ``w`` covers both one qubit per
input dimension and amplitude-encoded registers.

The recursive n-state circuit (``build_un``) places every unordered pair of
the n input registers into registers 1 and 2, in superposition keyed by the
mid-ancilla basis states.  Its structure for n inputs (n a power of two):

    U_n = [U_{n/2} on registers 1..n/2]
          [U_{n/2} on registers n/2+1..n]     (same shared ancilla block)
          cswap(reg 1,  reg n/2+1) * new ancilla C
          cswap(reg 1,  reg n/2+2) * new ancilla B
          cswap(reg 2,  reg n/2+1) * new ancilla A

with the base case n=4 following the same three-swap pattern.  Ancillas are
allocated depth-first: the three new ancillas (A, B, C top to bottom) stack
on top of the shared block used by both sub-circuits, giving exactly
d_n = 3*log2(n/2) mid ancillas and 3n/2-3 register swaps.

All ancillas start in |0> and every circuit opens with explicit Hadamards,
so only two gate kinds exist.  CircuitSpec and PairMap are immutable after
construction and safe to share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from . import statevec
from .statevec import ResourceError, StateVector

# derive_pair_map enumerates all 2^{d_n} ancilla outcomes.
MAX_PAIR_MAP_INPUTS = 64


@dataclass(frozen=True)
class Gate:
    """One gate record: kind is "h" (1 qubit) or "cswap" (control, a, b)."""

    kind: str
    qubits: tuple[int, ...]

    def __post_init__(self):
        if self.kind == "h":
            if len(self.qubits) != 1:
                raise ValueError(f"h gate takes one qubit, got {self.qubits}")
        elif self.kind == "cswap":
            if len(self.qubits) != 3 or len(set(self.qubits)) != 3:
                raise ValueError(
                    f"cswap takes three distinct qubits, got {self.qubits}"
                )
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if any(q < 0 for q in self.qubits):
            raise ValueError(f"negative qubit index in {self.qubits}")


def hadamard(qubit: int) -> Gate:
    return Gate("h", (qubit,))


def cswap(control: int, a: int, b: int) -> Gate:
    return Gate("cswap", (control, a, b))


@dataclass(frozen=True)
class RegisterLayout:
    """Names the qubits: optional top ancilla, mid ancillas (wire order),
    and input registers 1..n of width w."""

    n: int
    w: int
    top_ancilla: int | None
    mid_ancillas: tuple[int, ...]
    inputs: tuple[tuple[int, ...], ...]

    @property
    def total_qubits(self) -> int:
        return (0 if self.top_ancilla is None else 1) + len(self.mid_ancillas) + self.n * self.w

    @property
    def ancilla_count(self) -> int:
        return (0 if self.top_ancilla is None else 1) + len(self.mid_ancillas)

    @property
    def measured_qubits(self) -> tuple[int, ...]:
        """Top ancilla (if present) followed by the mid ancillas."""
        top = () if self.top_ancilla is None else (self.top_ancilla,)
        return top + self.mid_ancillas


@dataclass(frozen=True)
class CircuitSpec:
    """Ordered gate list plus layout, with cached resource counts."""

    layout: RegisterLayout
    gates: tuple[Gate, ...]
    cswap_count: int
    ancilla_count: int

    def __post_init__(self):
        total = self.layout.total_qubits
        for g in self.gates:
            if any(q >= total for q in g.qubits):
                raise ValueError(
                    f"gate {g} references qubit outside the {total}-qubit layout"
                )


def _make_spec(layout: RegisterLayout, gates: Sequence[Gate]) -> CircuitSpec:
    gates = tuple(gates)
    n_cswap = sum(1 for g in gates if g.kind == "cswap")
    return CircuitSpec(layout, gates, n_cswap, layout.ancilla_count)


def count_resources(circuit: CircuitSpec) -> tuple[int, int, int]:
    """(cswap_count, ancilla_count, total_qubits), recounted from the gate
    list and layout.  Raises if the recount disagrees with the cached counts."""
    n_cswap = sum(1 for g in circuit.gates if g.kind == "cswap")
    n_anc = circuit.layout.ancilla_count
    if n_cswap != circuit.cswap_count or n_anc != circuit.ancilla_count:
        raise ValueError(
            f"cached counts ({circuit.cswap_count}, {circuit.ancilla_count}) "
            f"disagree with recount ({n_cswap}, {n_anc})"
        )
    return n_cswap, n_anc, circuit.layout.total_qubits


def _input_registers(first_qubit: int, n: int, w: int) -> tuple[tuple[int, ...], ...]:
    return tuple(
        tuple(range(first_qubit + i * w, first_qubit + (i + 1) * w)) for i in range(n)
    )


def build_swap_test(w: int) -> CircuitSpec:
    """Standard two-state swap test on registers of width w.

    H(ancilla), then one CSWAP per qubit position, then H(ancilla).
    P(ancilla=0) = 1/2 + |<phi|psi>|^2 / 2.
    """
    if w < 1:
        raise ValueError(f"register width must be >= 1, got {w}")
    layout = RegisterLayout(
        n=2, w=w, top_ancilla=0, mid_ancillas=(), inputs=_input_registers(1, 2, w)
    )
    gates = [hadamard(0)]
    gates += [cswap(0, layout.inputs[0][k], layout.inputs[1][k]) for k in range(w)]
    gates.append(hadamard(0))
    return _make_spec(layout, gates)


def build_naive_multiswap(n: int, w: int = 1) -> list[tuple[tuple[int, int], CircuitSpec]]:
    """One independent swap-test circuit per unordered pair of n inputs.

    Returns n(n-1)/2 entries of ((i, j), circuit) with 1-based input labels.
    The single ancilla is reusable between runs, so the battery needs O(1)
    ancillas but n(n-1)/2 * w CSWAPs per repetition round.
    """
    if n < 2:
        raise ValueError(f"need at least 2 inputs, got {n}")
    circuit = build_swap_test(w)
    return [((i, j), circuit) for i, j in combinations(range(1, n + 1), 2)]


def _require_power_of_two(n: int) -> None:
    if n < 4 or n & (n - 1):
        raise ValueError(f"n must be a power of two >= 4, got {n}")


def mid_ancilla_count(n: int) -> int:
    """d_n = 3*log2(n/2) for n a power of two >= 4."""
    _require_power_of_two(n)
    return 3 * int(math.log2(n // 2))


def _register_swaps(regs: list[int], ancs: list[int]) -> list[tuple[int, int, int]]:
    """Recursive (ancilla, register, register) swap schedule of U_n.

    ``regs`` are register ids, ``ancs`` mid-ancilla wire ids in top-to-bottom
    order (three fresh ancillas first, shared sub-block ancillas after).
    """
    n = len(regs)
    if n == 4:
        a, b, c = ancs
        return [(c, regs[0], regs[2]), (b, regs[0], regs[3]), (a, regs[1], regs[2])]
    (a, b, c), shared = ancs[:3], ancs[3:]
    half = n // 2
    swaps = _register_swaps(regs[:half], shared)
    swaps += _register_swaps(regs[half:], shared)
    swaps += [
        (c, regs[0], regs[half]),
        (b, regs[0], regs[half + 1]),
        (a, regs[1], regs[half]),
    ]
    return swaps


def un_register_swaps(n: int) -> list[tuple[int, int, int]]:
    """U_n schedule as (mid-ancilla wire, register index, register index),
    registers 0-based.  Length is exactly 3n/2 - 3."""
    d = mid_ancilla_count(n)
    return _register_swaps(list(range(n)), list(range(d)))


def build_un(n: int, w: int = 1) -> CircuitSpec:
    """The recursive n-state pairing circuit U_n (no final swap test).

    Uses (3n/2-3)*w CSWAPs and d_n = 3*log2(n/2) mid ancillas.
    """
    if w < 1:
        raise ValueError(f"register width must be >= 1, got {w}")
    d = mid_ancilla_count(n)
    layout = RegisterLayout(
        n=n,
        w=w,
        top_ancilla=None,
        mid_ancillas=tuple(range(d)),
        inputs=_input_registers(d, n, w),
    )
    gates = [hadamard(q) for q in layout.mid_ancillas]
    for anc, ra, rb in un_register_swaps(n):
        gates += [
            cswap(layout.mid_ancillas[anc], layout.inputs[ra][k], layout.inputs[rb][k])
            for k in range(w)
        ]
    return _make_spec(layout, gates)


def build_u4(w: int = 1) -> CircuitSpec:
    """The four-state base circuit: 3 mid ancillas, 3*w CSWAPs."""
    return build_un(4, w)


def build_multiswap_full(n: int, w: int = 1) -> CircuitSpec:
    """U_n plus the final swap test between registers 1 and 2.

    Adds one top ancilla, w final CSWAPs and a closing Hadamard; the measured
    qubits are the top ancilla and the d_n mid ancillas.  Total CSWAP count is
    (3n/2 - 3 + 1)*w.
    """
    if w < 1:
        raise ValueError(f"register width must be >= 1, got {w}")
    d = mid_ancilla_count(n)
    layout = RegisterLayout(
        n=n,
        w=w,
        top_ancilla=0,
        mid_ancillas=tuple(range(1, d + 1)),
        inputs=_input_registers(1 + d, n, w),
    )
    gates = [hadamard(0)]
    gates += [hadamard(q) for q in layout.mid_ancillas]
    for anc, ra, rb in un_register_swaps(n):
        gates += [
            cswap(layout.mid_ancillas[anc], layout.inputs[ra][k], layout.inputs[rb][k])
            for k in range(w)
        ]
    gates += [cswap(0, layout.inputs[0][k], layout.inputs[1][k]) for k in range(w)]
    gates.append(hadamard(0))
    return _make_spec(layout, gates)


def pad_inputs(states: Sequence[StateVector], w: int) -> list[StateVector]:
    """Pad an input list with |0...0> registers up to the next power of two >= 4."""
    if len(states) < 2:
        raise ValueError(f"need at least 2 input states, got {len(states)}")
    for s in states:
        if s.num_qubits != w:
            raise ValueError(
                f"all inputs must have width {w}, got a register of "
                f"{s.num_qubits} qubits"
            )
    target = 4
    while target < len(states):
        target *= 2
    padded = list(states)
    padded += [statevec.make_basis_state(w, 0) for _ in range(target - len(states))]
    return padded


@dataclass(frozen=True)
class PairMap:
    """Mid-ancilla outcome -> the ordered pair of input labels (1-based) left
    in registers 1 and 2 after U_n, plus per-unordered-pair multiplicities.

    Every one of the 2^{d_n} outcomes maps to exactly one pair, and every
    unordered pair is reached by at least one outcome; multiplicities are not
    uniform, which is why per-pair probabilities carry a factor
    multiplicity/2^{d_n+1} rather than a single constant.
    """

    n: int
    entries: dict[tuple[int, ...], tuple[int, int]]
    multiplicity: dict[tuple[int, int], int]

    @property
    def d(self) -> int:
        return mid_ancilla_count(self.n)

    def pair_constant(self, i: int, j: int) -> float:
        """multiplicity(i,j) / 2^{d_n+1}: the exact per-pair coefficient in
        P(pair, top=0) = coeff * (1 + |<phi_i|phi_j>|^2)."""
        key = (min(i, j), max(i, j))
        return self.multiplicity[key] / 2.0 ** (self.d + 1)

    def outcomes_for(self, i: int, j: int) -> list[tuple[int, ...]]:
        key = (min(i, j), max(i, j))
        return [
            bits
            for bits, (a, b) in self.entries.items()
            if (min(a, b), max(a, b)) == key
        ]


def derive_pair_map(n: int) -> PairMap:
    """Derive the outcome -> pair map of U_n by exact branch tracking.

    Every conditional branch of U_n is a register permutation, so for each
    mid-ancilla outcome the register contents after the circuit are a
    deterministic permutation of the input labels.  Tracking labels through
    the swap schedule per outcome is therefore exactly equivalent to running
    the circuit on computational-basis tags and reading registers 1 and 2
    (the statevector route is cross-checked in the tests at n=4).
    """
    _require_power_of_two(n)
    if n > MAX_PAIR_MAP_INPUTS:
        raise ResourceError(
            f"pair map enumeration is capped at n={MAX_PAIR_MAP_INPUTS} "
            f"(2^{mid_ancilla_count(n)} outcomes); got n={n}"
        )
    d = mid_ancilla_count(n)
    outcomes = np.arange(2**d)
    # bit i of each outcome, in mid-ancilla wire order
    bits = (outcomes[:, None] >> (d - 1 - np.arange(d))) & 1
    contents = np.tile(np.arange(1, n + 1), (2**d, 1))
    for anc, ra, rb in un_register_swaps(n):
        on = bits[:, anc] == 1
        tmp = contents[on, ra].copy()
        contents[on, ra] = contents[on, rb]
        contents[on, rb] = tmp
    # each branch must be a permutation of the labels: nothing lost, nothing
    # duplicated
    if not np.array_equal(
        np.sort(contents, axis=1), np.tile(np.arange(1, n + 1), (2**d, 1))
    ):
        raise AssertionError("branch of U_n is not a register permutation")
    entries: dict[tuple[int, ...], tuple[int, int]] = {}
    multiplicity: dict[tuple[int, int], int] = {}
    for row in range(2**d):
        key = tuple(int(b) for b in bits[row])
        i, j = int(contents[row, 0]), int(contents[row, 1])
        entries[key] = (i, j)
        pair = (min(i, j), max(i, j))
        multiplicity[pair] = multiplicity.get(pair, 0) + 1
    missing = set(combinations(range(1, n + 1), 2)) - set(multiplicity)
    if missing:
        raise AssertionError(f"pair map does not cover pairs {sorted(missing)}")
    return PairMap(n, entries, multiplicity)


def simulate(circuit: CircuitSpec, inputs: Sequence[StateVector]) -> StateVector:
    """Run the circuit on the given input registers (ancillas start in |0>)."""
    layout = circuit.layout
    if len(inputs) != layout.n:
        raise ValueError(f"circuit expects {layout.n} input registers, got {len(inputs)}")
    for s in inputs:
        if s.num_qubits != layout.w:
            raise ValueError(
                f"circuit expects width-{layout.w} registers, got {s.num_qubits}"
            )
    if layout.ancilla_count > 0:
        parts = [statevec.make_basis_state(layout.ancilla_count, 0), *inputs]
    else:
        parts = list(inputs)
    state = statevec.tensor(parts)
    for g in circuit.gates:
        if g.kind == "h":
            state = statevec.apply_hadamard(state, g.qubits[0])
        else:
            state = statevec.apply_cswap(state, *g.qubits)
    return state


def circuit_to_json(circuit: CircuitSpec) -> dict:
    """JSON-ready dump: {n, w, layout, gates, counts}."""
    layout = circuit.layout
    return {
        "n": layout.n,
        "w": layout.w,
        "layout": {
            "top_ancilla": layout.top_ancilla,
            "mid_ancillas": list(layout.mid_ancillas),
            "inputs": [list(reg) for reg in layout.inputs],
        },
        "gates": [{"type": g.kind, "qubits": list(g.qubits)} for g in circuit.gates],
        "counts": {
            "cswap": circuit.cswap_count,
            "ancilla": circuit.ancilla_count,
            "total_qubits": layout.total_qubits,
        },
    }
