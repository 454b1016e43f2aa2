"""Sparse statevector simulator over a laid-out multi-register qubit system.

States are maps from computational basis keys (ints, qubit j at bit
position j) to complex amplitudes.  The storage and retrieval circuits of
this package keep at most O(p) nonzero amplitudes, so memory scales with
the number of stored patterns rather than with 2^N.

Gate set (matching the circuits built in :mod:`qamem.memory` and
:mod:`qamem.retrieval`):

* ``NOT``, ``H``, ``XOR`` (controlled NOT), ``TOFFOLI``, ``NXOR``
  (multi-controlled NOT, optionally with per-control polarities);
* ``CS(i)``: controlled real rotation with sin = 1/sqrt(i);
* ``PHASE0(theta)``: diag(e^{i theta}, 1), phase on the |0> component,
  optionally controlled;
* ``ROTY(angle)``: real rotation [[cos, -sin], [sin, cos]], optionally
  controlled (ROTY(pi/2)|0> = |1>);
* ``FLIP0``: sign flip on the all-zeros subspace of its target qubits
  (amplitude-amplification oracle).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

PRUNE_THRESHOLD = 1e-12

_MIXING_KINDS = {"H", "CS", "ROTY"}
_VALID_KINDS = {"NOT", "H", "XOR", "TOFFOLI", "NXOR", "CS", "PHASE0", "ROTY", "FLIP0"}


class SimulatorError(ValueError):
    """Invalid gate, layout or state."""


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered named sections of a qubit register file."""

    sections: tuple[tuple[str, int], ...]

    def __post_init__(self):
        names = [name for name, _ in self.sections]
        if len(set(names)) != len(names):
            raise SimulatorError("duplicate section names")
        if any(w < 0 for _, w in self.sections):
            raise SimulatorError("section widths must be >= 0")

    @property
    def total(self) -> int:
        return sum(w for _, w in self.sections)

    def offset(self, name: str) -> int:
        off = 0
        for sec, w in self.sections:
            if sec == name:
                return off
            off += w
        raise SimulatorError(f"no section named {name!r}")

    def width(self, name: str) -> int:
        for sec, w in self.sections:
            if sec == name:
                return w
        raise SimulatorError(f"no section named {name!r}")

    def qubits(self, name: str) -> range:
        off = self.offset(name)
        return range(off, off + self.width(name))


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    param: float | int | None = None
    # per-control required values for NXOR; all-ones when None
    polarity: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in _VALID_KINDS:
            raise SimulatorError(f"unknown gate kind {self.kind!r}")
        seen = self.targets + self.controls
        if len(set(seen)) != len(seen):
            raise SimulatorError(f"overlapping target/control indices in {self}")
        if self.kind == "CS" and (self.param is None or abs(self.param) < 1):
            raise SimulatorError("CS requires integer parameter i >= 1")
        if self.polarity is not None and len(self.polarity) != len(self.controls):
            raise SimulatorError("polarity length must match controls")

    def inverse(self) -> "Gate":
        if self.kind in ("NOT", "H", "XOR", "TOFFOLI", "NXOR", "FLIP0"):
            return self
        if self.kind == "CS":
            # S^i is a real rotation; inverse = negated rotation, flagged
            # via negative parameter.
            return replace(self, param=-self.param)
        if self.kind in ("PHASE0", "ROTY"):
            return replace(self, param=-self.param)
        raise SimulatorError(f"no inverse for {self.kind}")

    def dump(self) -> str:
        param = "" if self.param is None else f"({self.param:g})"
        ctrl = ",".join(str(c) for c in self.controls)
        tgt = ",".join(str(t) for t in self.targets)
        return f"{self.kind}{param} {ctrl} -> {tgt}"


def not_gate(target: int) -> Gate:
    return Gate("NOT", (target,))


def h_gate(target: int) -> Gate:
    return Gate("H", (target,))


def xor_gate(control: int, target: int) -> Gate:
    return Gate("XOR", (target,), (control,))


def toffoli_gate(c1: int, c2: int, target: int) -> Gate:
    return Gate("TOFFOLI", (target,), (c1, c2))


def nxor_gate(controls, target: int, polarity=None) -> Gate:
    pol = None if polarity is None else tuple(polarity)
    return Gate("NXOR", (target,), tuple(controls), polarity=pol)


def cs_gate(i: int, control: int, target: int, inverse: bool = False) -> Gate:
    g = Gate("CS", (target,), (control,), param=int(i))
    return g.inverse() if inverse else g


def phase0_gate(theta: float, target: int, control: int | None = None) -> Gate:
    controls = () if control is None else (control,)
    return Gate("PHASE0", (target,), controls, param=theta)


def roty_gate(angle: float, target: int, control: int | None = None) -> Gate:
    controls = () if control is None else (control,)
    return Gate("ROTY", (target,), controls, param=angle)


def flip0_gate(targets) -> Gate:
    return Gate("FLIP0", tuple(targets))


def gate_matrix(gate: Gate):
    """2x2 matrix of a single-target gate (rows/cols ordered |0>, |1>)."""
    if gate.kind == "H":
        s = 1.0 / math.sqrt(2.0)
        return ((s, s), (s, -s))
    if gate.kind == "CS":
        i = abs(gate.param)
        c = math.sqrt((i - 1) / i)
        s = 1.0 / math.sqrt(i)
        if gate.param < 0:
            s = -s
        return ((c, s), (-s, c))
    if gate.kind == "ROTY":
        c, s = math.cos(gate.param), math.sin(gate.param)
        return ((c, -s), (s, c))
    if gate.kind == "PHASE0":
        return ((cmath.exp(1j * gate.param), 0.0), (0.0, 1.0))
    if gate.kind == "NOT":
        return ((0.0, 1.0), (1.0, 0.0))
    raise SimulatorError(f"{gate.kind} has no single-qubit matrix")


@dataclass(frozen=True)
class Circuit:
    gates: tuple[Gate, ...]
    layout: RegisterLayout

    def __post_init__(self):
        n = self.layout.total
        for g in self.gates:
            if any(q < 0 or q >= n for q in g.targets + g.controls):
                raise SimulatorError(f"gate {g.dump()} out of range for N={n}")

    def __len__(self) -> int:
        return len(self.gates)

    def inverse(self) -> "Circuit":
        return Circuit(tuple(g.inverse() for g in reversed(self.gates)), self.layout)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.layout != self.layout:
            raise SimulatorError("cannot concatenate circuits on different layouts")
        return Circuit(self.gates + other.gates, self.layout)

    def dump(self) -> str:
        return "".join(g.dump() + "\n" for g in self.gates)


@dataclass
class SparseState:
    layout: RegisterLayout
    amps: dict[int, complex] = field(default_factory=dict)

    @property
    def n_qubits(self) -> int:
        return self.layout.total

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amps.values()))

    def copy(self) -> "SparseState":
        return SparseState(self.layout, dict(self.amps))

    def section_value(self, key: int, name: str) -> int:
        off = self.layout.offset(name)
        return (key >> off) & ((1 << self.layout.width(name)) - 1)


def basis_state(layout: RegisterLayout, bits) -> SparseState:
    """Single-term state on the given bit assignment (sequence or string)."""
    if isinstance(bits, str):
        bits = [int(c) for c in bits]
    bits = list(bits)
    if len(bits) != layout.total:
        raise SimulatorError(f"expected {layout.total} bits, got {len(bits)}")
    key = 0
    for j, b in enumerate(bits):
        if b not in (0, 1):
            raise SimulatorError("bits must be 0/1")
        key |= b << j
    return SparseState(layout, {key: 1.0 + 0.0j})


def _controls_active(key: int, gate: Gate) -> bool:
    if gate.polarity is None:
        return all((key >> c) & 1 for c in gate.controls)
    return all((key >> c) & 1 == v for c, v in zip(gate.controls, gate.polarity))


def apply(state: SparseState, gate: Gate) -> SparseState:
    """Apply one gate, returning a new pruned state."""
    n = state.n_qubits
    if any(q < 0 or q >= n for q in gate.targets + gate.controls):
        raise SimulatorError(f"gate {gate.dump()} out of range for N={n}")

    amps = state.amps
    out: dict[int, complex] = {}

    if gate.kind in ("NOT", "XOR", "TOFFOLI", "NXOR"):
        t = gate.targets[0]
        mask = 1 << t
        for key, a in amps.items():
            out[key ^ mask if _controls_active(key, gate) else key] = a
        return SparseState(state.layout, out)

    if gate.kind == "FLIP0":
        mask = 0
        for q in gate.targets:
            mask |= 1 << q
        for key, a in amps.items():
            out[key] = -a if (key & mask) == 0 else a
        return SparseState(state.layout, out)

    if gate.kind == "PHASE0":
        t = gate.targets[0]
        phase = cmath.exp(1j * gate.param)
        for key, a in amps.items():
            if _controls_active(key, gate) and not (key >> t) & 1:
                out[key] = a * phase
            else:
                out[key] = a
        return SparseState(state.layout, out)

    # mixing gates: H, CS, ROTY
    (m00, m01), (m10, m11) = gate_matrix(gate)
    t = gate.targets[0]
    mask = 1 << t
    for key, a in amps.items():
        if not _controls_active(key, gate):
            out[key] = out.get(key, 0.0) + a
            continue
        if (key >> t) & 1:
            k0, k1 = key ^ mask, key
            a0, a1 = m01 * a, m11 * a
        else:
            k0, k1 = key, key ^ mask
            a0, a1 = m00 * a, m10 * a
        if a0:
            out[k0] = out.get(k0, 0.0) + a0
        if a1:
            out[k1] = out.get(k1, 0.0) + a1
    return SparseState(
        state.layout,
        {k: a for k, a in out.items() if abs(a) >= PRUNE_THRESHOLD},
    )


def apply_circuit(state: SparseState, circuit: Circuit) -> SparseState:
    if circuit.layout != state.layout:
        raise SimulatorError("circuit layout does not match state layout")
    for gate in circuit.gates:
        state = apply(state, gate)
    return state


def overlap(a: SparseState, b: SparseState) -> complex:
    """Inner product <a|b>."""
    if a.layout != b.layout:
        raise SimulatorError("layout mismatch in overlap")
    small, large = (a.amps, b.amps) if len(a.amps) <= len(b.amps) else (b.amps, a.amps)
    total = 0.0 + 0.0j
    for key, amp in small.items():
        other = large.get(key)
        if other is not None:
            if small is a.amps:
                total += amp.conjugate() * other
            else:
                total += other.conjugate() * amp
    return total


def section_marginal(state: SparseState, section: str) -> dict[int, float]:
    """Probability of each observed value of a section, sorted by value."""
    probs: dict[int, float] = {}
    for key, a in state.amps.items():
        v = state.section_value(key, section)
        probs[v] = probs.get(v, 0.0) + abs(a) ** 2
    return dict(sorted(probs.items()))


def measure_section(state: SparseState, section: str, rng) -> tuple[int, SparseState]:
    """Sample a measurement of one section; returns (value, collapsed state)."""
    probs = section_marginal(state, section)
    u = rng.random()
    acc = 0.0
    outcome = None
    for v, p in probs.items():
        acc += p
        if u < acc:
            outcome = v
            break
    if outcome is None:  # float round-off at the top of the CDF
        outcome = next(reversed(probs))
    prob, collapsed = postselect(state, section, outcome)
    if collapsed is None:
        raise SimulatorError("measured a zero-probability outcome")
    return outcome, collapsed


def postselect(
    state: SparseState, section: str, value
) -> tuple[float, SparseState | None]:
    """Project a section onto a value; returns (probability, renormalized state)."""
    if isinstance(value, str):
        v = 0
        for j, c in enumerate(value):
            v |= int(c) << j
        value = v
    matching = {
        k: a for k, a in state.amps.items() if state.section_value(k, section) == value
    }
    prob = sum(abs(a) ** 2 for a in matching.values())
    if prob < 1e-15:
        return 0.0, None
    scale = 1.0 / math.sqrt(prob)
    return prob, SparseState(state.layout, {k: a * scale for k, a in matching.items()})
