"""Routing schedules: evolution windows alternating with local phase flips.

A schedule is a list of steps.  ``Evolve`` propagates the whole network for a
fixed duration; ``PhaseFlip`` multiplies the atom amplitude of selected sites
by -1 (a local sigma_z on each listed atom), which exchanges symmetric and
antisymmetric collective modes and thereby hands the excitation from one
invariant block to the next.  ``PhaseShift`` applies an arbitrary phase to
one atom; the entanglement protocol uses it to undo the transfer phase.

``run_schedule`` always evolves under the full network Hamiltonian - the
block picture is what the tests check it against, not what it computes.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import fsum
from typing import Union

import numpy as np

from .evolution import ExcitationState, Spectrum, eigendecompose
from .network import (
    HADAMARD_SIGNS,
    HexLatticeDescriptor,
    NetworkSpec,
    atom_index,
    build_single_excitation_hamiltonian,
    hex_lattice_layout,
)

__all__ = [
    "Evolve",
    "PhaseFlip",
    "PhaseShift",
    "Schedule",
    "TraceResult",
    "EntanglementResult",
    "local_phase_flip",
    "chain_routing_schedule",
    "switch_port_flip",
    "switch_schedule",
    "hex_routing_schedule",
    "run_schedule",
    "entanglement_transfer",
]


@dataclass(frozen=True)
class Evolve:
    duration: float

    def __post_init__(self) -> None:
        if not self.duration >= 0.0:
            raise ValueError(f"evolution window must be >= 0, got {self.duration}")


@dataclass(frozen=True)
class PhaseFlip:
    """Multiply the atom amplitude of each listed site by -1."""

    atom_sites: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "atom_sites", tuple(self.atom_sites))
        if len(set(self.atom_sites)) != len(self.atom_sites):
            raise ValueError("duplicate site in phase flip")
        if not self.atom_sites:
            raise ValueError("a phase flip needs at least one site")


@dataclass(frozen=True)
class PhaseShift:
    """Multiply one atom amplitude by ``exp(i angle)``."""

    site: int
    angle: float


Step = Union[Evolve, PhaseFlip, PhaseShift]


@dataclass(frozen=True)
class Schedule:
    """Steps plus the designated source and target modes.

    ``source``/``target`` are ``(site, kind)`` pairs with kind ``"atom"`` or
    ``"cavity"``; the trace records the final amplitude on the target mode.
    """

    steps: tuple[Step, ...]
    source: tuple[int, str]
    target: tuple[int, str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))
        for name, (site, kind) in (("source", self.source), ("target", self.target)):
            if kind not in ("atom", "cavity"):
                raise ValueError(f"{name} kind must be 'atom' or 'cavity', got {kind!r}")
            if site < 0:
                raise ValueError(f"{name} site must be >= 0, got {site}")

    def total_evolve_time(self) -> float:
        """Exact (order-independent) sum of all evolution windows."""
        return fsum(step.duration for step in self.steps if isinstance(step, Evolve))

    def num_flips(self) -> int:
        return sum(1 for step in self.steps if isinstance(step, PhaseFlip))


def local_phase_flip(state: ExcitationState, atom_sites) -> ExcitationState:
    """Flip the sign of the atom amplitude at each listed site."""
    amps = state.amps.copy()
    for site in atom_sites:
        index = atom_index(site)
        if not 0 <= index < state.dim:
            raise ValueError(f"site {site} outside the network")
        amps[index] = -amps[index]
    return ExcitationState(amps=amps, vac=state.vac)


def chain_routing_schedule(n: int, t1: float, t2: float) -> Schedule:
    """End-to-end schedule for a diamond chain of ``n`` units.

    Evolve for ``t1`` (sender block transfer), then ``n - 1`` times flip and
    evolve for ``t2`` (relay block transfers), then flip once more and evolve
    for ``t1`` (receiver block).  Flips act on the atoms of the second
    control site of every unit (1-based site labels ``3k``); total evolve
    time is ``2 t1 + (n - 1) t2`` with ``n`` flips.
    """
    if n < 1:
        raise ValueError(f"chain schedule needs n >= 1, got {n}")
    if not (t1 > 0 and t2 > 0):
        raise ValueError("transfer times must be positive")
    flip = PhaseFlip(atom_sites=tuple(3 * k - 1 for k in range(1, n + 1)))
    steps: list[Step] = [Evolve(t1)]
    for _ in range(n - 1):
        steps.append(flip)
        steps.append(Evolve(t2))
    steps.append(flip)
    steps.append(Evolve(t1))
    return Schedule(steps=tuple(steps), source=(0, "atom"), target=(3 * n, "atom"))


def _port_flip_sites(inner_sites, port_from: int, port_to: int) -> tuple[int, ...]:
    # the two inner atoms whose Hadamard signs differ between the ports
    if port_from == port_to:
        raise ValueError("port flip needs two distinct ports")
    for port in (port_from, port_to):
        if port not in (0, 1, 2, 3):
            raise ValueError(f"port must be in 0..3, got {port}")
    return tuple(
        inner_sites[k]
        for k in range(4)
        if HADAMARD_SIGNS[port_from][k] != HADAMARD_SIGNS[port_to][k]
    )


def switch_port_flip(
    port_from: int, port_to: int, inner_sites: tuple[int, int, int, int] = (4, 5, 6, 7)
) -> PhaseFlip:
    """Flip that steers the collective mode of one port onto another.

    Flipping the atoms where the two Hadamard rows disagree maps
    ``xi[port_from]`` onto ``xi[port_to]`` (and vice versa), so an excitation
    parked in the upload block continues its transfer toward the chosen
    delivery port.
    """
    return PhaseFlip(atom_sites=_port_flip_sites(inner_sites, port_from, port_to))


def switch_schedule(port: int, t: float) -> Schedule:
    """Upload at ``nu0``, steer, deliver at ``nu<port>`` (port 1, 2, or 3)."""
    if port not in (1, 2, 3):
        raise ValueError(f"delivery port must be 1, 2, or 3, got {port}")
    if not t > 0:
        raise ValueError("transfer time must be positive")
    return Schedule(
        steps=(Evolve(t), switch_port_flip(0, port), Evolve(t)),
        source=(0, "atom"),
        target=(port, "atom"),
    )


def hex_routing_schedule(
    desc: HexLatticeDescriptor,
    path,
    t_upload: float,
    t_hop: float,
) -> Schedule:
    """Route an excitation along ``path`` (a vertex sequence) on a lattice.

    The first and last vertices must carry upload sites; consecutive
    vertices must share a link.  The schedule uploads at the first vertex,
    steers the collective mode onto each link port in turn, and finally
    parks the excitation in the last vertex's upload site: ``len(path) - 1``
    hops and ``len(path)`` flips in total.
    """
    path = list(path)
    if len(path) < 2:
        raise ValueError("a route needs at least two vertices (zero-hop paths are invalid)")
    if not (t_upload > 0 and t_hop > 0):
        raise ValueError("transfer times must be positive")
    layout = hex_lattice_layout(desc)
    for v in (path[0], path[-1]):
        if v not in desc.uploads:
            raise ValueError(f"vertex {v!r} has no upload site")

    def link_between(a: str, b: str) -> tuple[int, int]:
        # ports (at a, at b) of the first link joining the two vertices
        for va, pa, vb, pb in desc.links:
            if (va, vb) == (a, b):
                return pa, pb
            if (vb, va) == (a, b):
                return pb, pa
        raise ValueError(f"no link between {a!r} and {b!r}")

    steps: list[Step] = [Evolve(t_upload)]
    current_port = 0
    for here, there in zip(path[:-1], path[1:]):
        port_out, port_in = link_between(here, there)
        steps.append(
            PhaseFlip(_port_flip_sites(layout.inner[here], current_port, port_out))
        )
        steps.append(Evolve(t_hop))
        current_port = port_in
    steps.append(PhaseFlip(_port_flip_sites(layout.inner[path[-1]], current_port, 0)))
    steps.append(Evolve(t_upload))
    return Schedule(
        steps=tuple(steps),
        source=(layout.occupant[(path[0], 0)], "atom"),
        target=(layout.occupant[(path[-1], 0)], "atom"),
    )


@dataclass(frozen=True)
class TraceResult:
    """Sampled populations along a schedule plus the final state."""

    times: np.ndarray
    photon: np.ndarray
    populations: np.ndarray  # (samples, len(labels))
    labels: tuple[str, ...]
    norms: np.ndarray
    final_state: ExcitationState
    final_amplitude: complex
    total_time: float

    @property
    def final_population(self) -> float:
        return float(abs(self.final_amplitude) ** 2)

    @property
    def final_phase(self) -> float:
        return float(np.angle(self.final_amplitude))

    @property
    def num_samples(self) -> int:
        return int(self.times.shape[0])


def _mode_index(spec: NetworkSpec, site: int, kind: str) -> int:
    if not 0 <= site < spec.num_sites:
        raise ValueError(f"site {site} outside 0..{spec.num_sites - 1}")
    return 2 * site + (1 if kind == "atom" else 0)


def _apply_instant(state: ExcitationState, step: Step) -> ExcitationState:
    if isinstance(step, PhaseFlip):
        return local_phase_flip(state, step.atom_sites)
    if isinstance(step, PhaseShift):
        amps = state.amps.copy()
        index = atom_index(step.site)
        if not 0 <= index < state.dim:
            raise ValueError(f"site {step.site} outside the network")
        amps[index] = amps[index] * np.exp(1j * step.angle)
        return ExcitationState(amps=amps, vac=state.vac)
    raise TypeError(f"unknown instantaneous step {step!r}")


def run_schedule(
    spec: NetworkSpec,
    schedule: Schedule,
    initial: ExcitationState | None = None,
    samples_per_window: int = 241,
    track=None,
) -> TraceResult:
    """Execute a schedule under the full network Hamiltonian.

    Populations are sampled on ``samples_per_window`` equally spaced points
    per evolution window (window edges included; the duplicate sample at a
    window joint is dropped since instantaneous flips do not change any
    population).  ``track`` is an optional list of ``(label, mode_index)``
    pairs; by default the source and target atoms are tracked.
    """
    if samples_per_window < 2:
        raise ValueError(f"samples_per_window must be >= 2, got {samples_per_window}")
    src = _mode_index(spec, *schedule.source)
    tgt = _mode_index(spec, *schedule.target)
    if initial is None:
        initial = ExcitationState.excitation(spec.dim, src)
    if initial.dim != spec.dim:
        raise ValueError(f"initial state dim {initial.dim} != network dim {spec.dim}")
    for step in schedule.steps:
        if isinstance(step, (PhaseFlip, PhaseShift)):
            sites = step.atom_sites if isinstance(step, PhaseFlip) else (step.site,)
            for site in sites:
                _mode_index(spec, site, "atom")
    if track is None:
        track = [(f"atom[{spec.sites[schedule.source[0]].label}]", src)]
        if tgt != src:
            track.append((f"atom[{spec.sites[schedule.target[0]].label}]", tgt))
    labels = tuple(label for label, _ in track)
    mode_rows = np.array([index for _, index in track], dtype=int)

    h = build_single_excitation_hamiltonian(spec)
    spectrum: Spectrum = eigendecompose(h)
    v = spectrum.eigenvectors

    times: list[np.ndarray] = []
    photon: list[np.ndarray] = []
    tracked: list[np.ndarray] = []
    norms: list[np.ndarray] = []
    state = initial
    t_offset = 0.0
    first_window = True
    for step in schedule.steps:
        if not isinstance(step, Evolve):
            state = _apply_instant(state, step)
            continue
        taus = np.linspace(0.0, step.duration, samples_per_window)
        phases = np.exp(-1j * np.outer(spectrum.eigenvalues, taus))
        evolved = v @ (phases * (v.T @ state.amps)[:, None])  # (dim, samples)
        pops = np.abs(evolved) ** 2
        keep = slice(None) if first_window else slice(1, None)
        times.append(t_offset + taus[keep])
        photon.append(pops[0::2, keep].sum(axis=0))
        tracked.append(pops[mode_rows][:, keep].T)
        norms.append(np.sqrt(pops[:, keep].sum(axis=0) + abs(state.vac) ** 2))
        state = ExcitationState(amps=evolved[:, -1], vac=state.vac)
        t_offset += step.duration
        first_window = False
    if first_window:
        raise ValueError("schedule contains no evolution window")

    final_amplitude = complex(state.amps[tgt])
    return TraceResult(
        times=np.concatenate(times),
        photon=np.concatenate(photon),
        populations=np.concatenate(tracked, axis=0),
        labels=labels,
        norms=np.concatenate(norms),
        final_state=state,
        final_amplitude=final_amplitude,
        total_time=t_offset,
    )


@dataclass(frozen=True)
class EntanglementResult:
    """Entanglement-transfer outcome.

    ``amplitude`` is the transfer amplitude ``u`` of the excited branch;
    ``compensation_phase`` is the local phase that aligns it with the
    vacuum branch; ``bell_fidelity`` is the overlap-squared with the ideal
    entangled pair, after compensation when ``compensated`` is set.
    """

    bell_fidelity: float
    compensation_phase: float
    amplitude: complex
    compensated: bool
    trace: TraceResult


def entanglement_transfer(
    spec: NetworkSpec,
    schedule: Schedule,
    compensate: bool = True,
    samples_per_window: int = 2,
) -> EntanglementResult:
    """Transfer one half of an entangled pair through the network.

    A reference qubit is entangled with the source atom:
    ``(|0>_R |vac> + |1>_R |atom_src>) / sqrt(2)``.  The vacuum branch is
    stationary, so the joint state after the schedule is determined by the
    transfer amplitude ``u`` on the target mode.  The Bell fidelity against
    the ideal pair ``(|0>_R |vac> + |1>_R |atom_tgt>) / sqrt(2)`` is
    ``|(1 + u)|^2 / 4``; compensating the transfer phase with a local
    ``PhaseShift`` on the target atom turns this into ``((1 + |u|) / 2)^2``.
    """
    src = _mode_index(spec, *schedule.source)
    s = 1.0 / np.sqrt(2.0)
    initial = ExcitationState.with_vacuum(spec.dim, src, s, s)
    trace = run_schedule(spec, schedule, initial=initial, samples_per_window=samples_per_window)
    u = complex(np.sqrt(2.0) * trace.final_amplitude)
    theta = float(np.angle(u))
    if compensate:
        fidelity = ((1.0 + abs(u)) / 2.0) ** 2
    else:
        fidelity = ((1.0 + abs(u) * np.cos(theta)) ** 2 + (abs(u) * np.sin(theta)) ** 2) / 4.0
    return EntanglementResult(
        bell_fidelity=float(fidelity),
        compensation_phase=-theta,
        amplitude=u,
        compensated=compensate,
        trace=trace,
    )
