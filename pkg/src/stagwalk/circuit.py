"""Compilation of walk steps into native gate schedules, with dense checks.

Each tessellation layer conjugates a multi-controlled phase by the W-state
preparation unitary of every clique,

    exp(-i theta W) = e^{-i theta} U C^{s-1}Z_{2 theta} U^dagger

restricted to the clique. Qubits are graph vertices, and the excitation on
vertex ``v`` is qubit ``v`` in state ``|1>``.

W-state preparation
-------------------
``U`` maps ``|1...1>`` to the uniform single-excitation state. It first flips
qubits ``1..s-1`` to reach ``|10...0>`` and then walks the excitation along the
clique. Angle ``theta_m`` sets the amplitude left on qubit ``m``:

* ``theta_1 = 2 arccos(1/sqrt(s))``: ``CRY(theta_1)`` from qubit 0 onto qubit 1
  followed by ``CNOT(1 -> 0)``;
* ``theta_m = -2 arcsin(1/sqrt(s+1-m))`` for ``m >= 2``: ``CNOT(m-1 -> m)``,
  ``CRY(theta_m)`` and ``CNOT(m -> m-1)``. The controlled flip puts the target
  in ``|1>`` so the negative angle leaves a positive amplitude behind;
* ``theta_s = -pi`` keeps everything on the last qubit and emits no gates.

That is ``4s - 5`` gates for ``s >= 2``, ``3s - 4`` of them two-qubit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .tessellation import TessellationCover
from .walk import ResourceLimitError

MAX_DENSE_QUBITS = 12

GATE_KINDS = ("ry", "x", "cnot", "cry", "mcphase")


@dataclass(frozen=True)
class Gate:
    """A native gate.

    ``qubits`` is ``[q]`` for ``ry``/``x``, ``[control, target]`` for
    ``cnot``/``cry`` and ``[*controls, target]`` for ``mcphase``, which puts
    phase ``exp(i angle)`` on the all-ones state of its qubits.
    """

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"gate {self.kind} acts twice on the same qubit: {self.qubits}")
        arity = {"ry": 1, "x": 1, "cnot": 2, "cry": 2}
        if self.kind in arity and len(self.qubits) != arity[self.kind]:
            raise ValueError(f"{self.kind} takes {arity[self.kind]} qubits")
        if self.kind in ("ry", "cry", "mcphase") and self.angle is None:
            raise ValueError(f"{self.kind} needs an angle")

    def inverse(self) -> "Gate":
        if self.kind in ("x", "cnot"):
            return self
        return Gate(self.kind, self.qubits, -self.angle)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "qubits": list(self.qubits)}
        if self.angle is not None:
            d["angle"] = self.angle
        return d


@dataclass(frozen=True)
class Marker:
    """``layer`` opens a (tessellation, clique) block; ``barrier`` separates tessellations."""

    marker: str
    tessellation: int
    clique: int | None = None

    def to_dict(self) -> dict:
        d = {"marker": self.marker, "tessellation": self.tessellation}
        if self.clique is not None:
            d["clique"] = self.clique
        return d


Item = Union[Gate, Marker]


@dataclass
class GateSchedule:
    items: list[Item] = field(default_factory=list)
    global_phase: float = 0.0

    @property
    def gates(self) -> list[Gate]:
        return [it for it in self.items if isinstance(it, Gate)]

    def __len__(self):
        return len(self.gates)

    def qubits(self) -> list[int]:
        return sorted({q for g in self.gates for q in g.qubits})

    def count(self, kind: str | None = None) -> int:
        return sum(1 for g in self.gates if kind is None or g.kind == kind)

    def two_qubit_count(self) -> int:
        return sum(1 for g in self.gates if len(g.qubits) == 2)

    def inverse(self) -> "GateSchedule":
        return GateSchedule([g.inverse() for g in reversed(self.gates)], -self.global_phase)

    def extend(self, other: "GateSchedule") -> None:
        self.items.extend(other.items)
        self.global_phase += other.global_phase

    def blocks(self) -> list[tuple[int, int, set[int]]]:
        """``(tessellation, clique, qubits)`` for every layer block."""
        out = []
        for it in self.items:
            if isinstance(it, Marker) and it.marker == "layer":
                out.append((it.tessellation, it.clique, set()))
            elif isinstance(it, Gate) and out:
                out[-1][2].update(it.qubits)
        return out

    def to_jsonl(self) -> str:
        lines = [json.dumps(it.to_dict()) for it in self.items]
        lines.append(json.dumps({"global_phase": self.global_phase}))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "GateSchedule":
        sched = cls()
        for line in text.splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            if "global_phase" in rec:
                sched.global_phase = float(rec["global_phase"])
            elif "marker" in rec:
                sched.items.append(Marker(rec["marker"], int(rec["tessellation"]), rec.get("clique")))
            else:
                sched.items.append(Gate(rec["kind"], tuple(rec["qubits"]), rec.get("angle")))
        return sched


def save_schedule(schedule: GateSchedule, path: str | Path) -> None:
    Path(path).write_text(schedule.to_jsonl())


def load_schedule(path: str | Path) -> GateSchedule:
    return GateSchedule.from_jsonl(Path(path).read_text())


def wstate_angles(s: int) -> list[float]:
    """Rotation angles ``theta_1..theta_s`` for a size-``s`` W-state.

    ``cos(theta_1/2) = 1/sqrt(s)`` with ``theta_1`` in ``(0, pi]`` and
    ``sin(theta_m/2) = -1/sqrt(s+1-m)`` for ``m >= 2``. For ``s = 1`` the
    single angle is 0 (the state ``|1>`` is already prepared).
    """
    if s < 1:
        raise ValueError(f"clique size must be >= 1, got {s}")
    if s == 1:
        return [0.0]
    angles = [2 * math.acos(1 / math.sqrt(s))]
    angles += [-2 * math.asin(1 / math.sqrt(s + 1 - m)) for m in range(2, s + 1)]
    return angles


def compile_uprep(clique: Sequence[int], angles: Sequence[float] | None = None) -> GateSchedule:
    """Gates mapping ``|1...1>`` on ``clique`` to its W-state."""
    q = list(clique)
    s = len(q)
    if s < 1:
        raise ValueError("empty clique")
    theta = wstate_angles(s) if angles is None else list(angles)
    gates: list[Gate] = [Gate("x", (v,)) for v in q[1:]]
    if s >= 2:
        gates += [Gate("cry", (q[0], q[1]), theta[0]), Gate("cnot", (q[1], q[0]))]
    for m in range(2, s):
        a, b = q[m - 1], q[m]
        gates += [Gate("cnot", (a, b)), Gate("cry", (a, b), theta[m - 1]), Gate("cnot", (b, a))]
    return GateSchedule(list(gates))


def _check_theta(theta: float) -> None:
    if not 0 < theta <= math.pi:
        raise ValueError(f"theta must lie in (0, pi], got {theta}")


def compile_clique(clique: Sequence[int], theta: float, angles: Sequence[float] | None = None) -> GateSchedule:
    """``exp(-i theta W)`` on one clique as ``U C^{s-1}Z_{2 theta} U^dagger``.

    Gates are in time order, so the inverse preparation comes first. The
    schedule carries global phase ``-theta``.
    """
    _check_theta(theta)
    q = list(clique)
    prep = compile_uprep(q, angles)
    sched = GateSchedule(list(prep.inverse().items))
    sched.items.append(Gate("mcphase", tuple(q), 2 * theta))
    sched.items.extend(prep.items)
    sched.global_phase = -theta
    return sched


def compile_walk(cover: TessellationCover, theta: float) -> GateSchedule:
    """Full walk step as layers of parallel clique blocks.

    Layers appear in time order, so tessellation ``T-1`` comes first, matching
    :func:`stagwalk.walk.walk_step`. Outside the excited clique every block
    sees ``|0...0>`` and acts trivially, so the phase relative to the
    single-excitation walk is ``-theta`` per tessellation, not per clique.
    """
    if not cover.is_complete():
        raise ValueError("compile_walk needs a completed cover")
    _check_theta(theta)
    sched = GateSchedule()
    order = list(range(cover.t_count - 1, -1, -1))
    for i, c in enumerate(order):
        if i:
            sched.items.append(Marker("barrier", c))
        for k, clique in enumerate(cover.cliques[c]):
            sched.items.append(Marker("layer", c, k))
            sched.items.extend(compile_clique(clique, theta).items)
        sched.global_phase -= theta
    return sched


def layers_disjoint(schedule: GateSchedule) -> bool:
    by_tess: dict[int, list[set[int]]] = {}
    for c, _, qs in schedule.blocks():
        by_tess.setdefault(c, []).append(qs)
    for blocks in by_tess.values():
        seen: set[int] = set()
        for qs in blocks:
            if seen & qs:
                return False
            seen |= qs
    return True


def oversized_phase_gates(schedule: GateSchedule, max_qubits: int) -> list[Gate]:
    """Multi-controlled phases wider than the hardware can run natively."""
    return [g for g in schedule.gates if g.kind == "mcphase" and len(g.qubits) > max_qubits]


# --- dense simulation ----------------------------------------------------------


def _ry(angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


_X = np.array([[0, 1], [1, 0]], dtype=complex)


def _gate_matrix(g: Gate) -> np.ndarray:
    if g.kind == "x":
        return _X
    if g.kind == "ry":
        return _ry(g.angle)
    if g.kind == "cnot":
        m = np.eye(4, dtype=complex)
        m[2:, 2:] = _X
        return m
    if g.kind == "cry":
        m = np.eye(4, dtype=complex)
        m[2:, 2:] = _ry(g.angle)
        return m
    raise ValueError(g.kind)


def _apply(tensor: np.ndarray, g: Gate, axis: dict[int, int]) -> np.ndarray:
    axes = [axis[q] for q in g.qubits]
    if g.kind == "mcphase":
        idx = [slice(None)] * tensor.ndim
        for a in axes:
            idx[a] = 1
        tensor[tuple(idx)] *= np.exp(1j * g.angle)
        return tensor
    k = len(axes)
    mat = _gate_matrix(g).reshape((2,) * (2 * k))
    out = np.tensordot(mat, tensor, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def simulate_schedule_dense(
    schedule: GateSchedule,
    qubits: Sequence[int] | None = None,
    max_qubits: int = MAX_DENSE_QUBITS,
    include_global_phase: bool = True,
) -> np.ndarray:
    """Dense ``2^s x 2^s`` unitary of a schedule.

    ``qubits`` fixes the register order (first qubit most significant) and
    defaults to the sorted qubits the schedule touches.
    """
    qubits = schedule.qubits() if qubits is None else list(qubits)
    s = len(qubits)
    if s > max_qubits:
        raise ResourceLimitError(f"dense simulation limited to {max_qubits} qubits, got {s}")
    axis = {q: i for i, q in enumerate(qubits)}
    dim = 2**s
    tensor = np.eye(dim, dtype=complex).reshape((2,) * s + (dim,))
    for g in schedule.gates:
        tensor = _apply(tensor, g, axis)
    u = tensor.reshape(dim, dim)
    if include_global_phase:
        u = u * np.exp(1j * schedule.global_phase)
    return u


def single_excitation_indices(s: int) -> np.ndarray:
    """Basis index of the excitation on register position ``j`` (big-endian)."""
    return np.array([1 << (s - 1 - j) for j in range(s)])


def restrict_to_single_excitation(u: np.ndarray) -> np.ndarray:
    s = int(round(math.log2(u.shape[0])))
    idx = single_excitation_indices(s)
    return u[np.ix_(idx, idx)]


def wstate_vector(s: int) -> np.ndarray:
    vec = np.zeros(2**s, dtype=complex)
    vec[single_excitation_indices(s)] = 1 / math.sqrt(s)
    return vec


@dataclass(frozen=True)
class Equivalence:
    ok: bool
    max_deviation: float
    full_space_deviation: float
    subspace_deviation: float

    def __bool__(self):
        return self.ok


def verify_clique_equivalence(
    clique: Sequence[int] | int,
    theta: float,
    tol: float = 1e-9,
    schedule: GateSchedule | None = None,
) -> Equivalence:
    """Compare a compiled clique against the target operator, densely.

    Checks the full register against ``e^{-i theta}(I + (e^{2i theta} - 1)|W><W|)``
    and the single-excitation block against ``cos(theta) I - i sin(theta) W``.
    """
    if isinstance(clique, int):
        clique = list(range(clique))
    q = list(clique)
    s = len(q)
    if s > MAX_DENSE_QUBITS:
        raise ResourceLimitError(f"clique size {s} exceeds dense limit {MAX_DENSE_QUBITS}")
    if schedule is None:
        schedule = compile_clique(q, theta)
    u = simulate_schedule_dense(schedule, q)

    w = wstate_vector(s)
    target = np.exp(-1j * theta) * (np.eye(2**s) + (np.exp(2j * theta) - 1) * np.outer(w, w.conj()))
    full_dev = float(np.max(np.abs(u - target)))

    refl = np.eye(s) - 2 * np.full((s, s), 1 / s)
    sub_target = math.cos(theta) * np.eye(s) - 1j * math.sin(theta) * refl
    sub_dev = float(np.max(np.abs(restrict_to_single_excitation(u) - sub_target)))

    dev = max(full_dev, sub_dev)
    return Equivalence(dev < tol, dev, full_dev, sub_dev)


def verify_walk_schedule(schedule: GateSchedule, cover: TessellationCover, theta: float) -> float:
    """Max deviation between a compiled walk and the subspace walk operator.

    Simulates the whole register, so only for covers on at most
    ``MAX_DENSE_QUBITS`` vertices.
    """
    from .walk import walk_operator

    u = simulate_schedule_dense(schedule, list(range(cover.n)))
    return float(np.max(np.abs(restrict_to_single_excitation(u) - walk_operator(cover, theta))))
