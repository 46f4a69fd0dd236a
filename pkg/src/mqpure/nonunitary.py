"""Non-unitary steps: crusher dephasing and partial saturation.

Saturation is modeled as a classical rate equation on the populations of
secular-Hamiltonian eigenstates,

    dp_a/dt = sum_b W_ab (p_b - p_a),

with symmetric rates W_ab proportional to the single-quantum transition
strength times a Gaussian spectral envelope of the irradiation.  States
whose transitions all fall outside the envelope keep their population:
that trapping is the whole point of saturating only part of the
spectrum.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .spin_core import DensityMatrix, Operator, ZeemanBasis, _frozen_array

STRENGTH_THRESHOLD = 1e-10  # relative to the strongest transition

_STEADY_STATE_TOL = 1e-12


@dataclass(frozen=True)
class SaturationParams:
    """Gaussian-envelope saturation settings.

    Args:
        center_frequency: Envelope center, in the secular spectrum units.
        width_sigma: Envelope standard deviation (> 0).
        rate_scale: Overall rate constant (> 0, arbitrary units).
        duration: Integration time for "timed" mode (> 0, in units where
            rate_scale * duration is dimensionless).
        mode: "steady_state" (relax the driven transitions completely) or
            "timed" (integrate for ``duration``).
        envelope_floor: In steady-state mode, transitions whose envelope
            factor falls below this fraction of the peak are treated as
            undriven; populations connected only through them stay put.
    """

    center_frequency: float
    width_sigma: float
    rate_scale: float = 1.0
    duration: float = 1.0
    mode: str = "steady_state"
    envelope_floor: float = 1e-3

    def __post_init__(self):
        if self.width_sigma <= 0:
            raise ValueError("width_sigma must be positive")
        if self.rate_scale <= 0:
            raise ValueError("rate_scale must be positive")
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if self.mode not in ("timed", "steady_state"):
            raise ValueError(f"unknown saturation mode {self.mode!r}")
        if self.envelope_floor < 0:
            raise ValueError("envelope_floor must be nonnegative")

    def envelope(self, frequency) -> np.ndarray:
        """Gaussian spectral weight at the given frequency (peak = 1)."""
        x = (np.asarray(frequency, dtype=float) - self.center_frequency)
        return np.exp(-(x**2) / (2.0 * self.width_sigma**2))


@dataclass(frozen=True)
class TransitionGraph:
    """Allowed single-quantum transitions between secular eigenstates.

    Eigenstates are ordered by (m block ascending, energy ascending), so
    the all-down state is index 0 and the all-up state is the last one.
    Each edge joins ``upper[k]`` (magnetization m+1) to ``lower[k]``
    (magnetization m) with ``frequencies[k] = E_upper - E_lower`` and
    ``strengths[k] = |<upper| I_+ |lower>|^2``.
    """

    energies: np.ndarray = field(repr=False)
    m_values: np.ndarray = field(repr=False)
    transform: np.ndarray = field(repr=False)  # columns: eigenstates in the Zeeman basis
    upper: np.ndarray = field(repr=False)
    lower: np.ndarray = field(repr=False)
    frequencies: np.ndarray = field(repr=False)
    strengths: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("energies", "m_values", "frequencies", "strengths"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name), float))
        for name in ("upper", "lower"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name), int))
        object.__setattr__(self, "transform", _frozen_array(self.transform, complex))
        if np.any(self.strengths < 0):
            raise ValueError("strengths must be nonnegative")
        dm = self.m_values[self.upper] - self.m_values[self.lower]
        if dm.size and np.abs(dm - 1.0).max() > 1e-9:
            raise ValueError("graph edges must connect m to m+1")

    @property
    def n_states(self) -> int:
        return self.energies.shape[0]

    @property
    def n_edges(self) -> int:
        return self.frequencies.shape[0]

    @property
    def index_all_up(self) -> int:
        return int(np.argmax(self.m_values))

    @property
    def index_all_down(self) -> int:
        return int(np.argmin(self.m_values))

    def populations(self, rho: DensityMatrix) -> np.ndarray:
        """Eigenstate populations: diagonal of rho in the eigenbasis."""
        if rho.dim != self.n_states:
            raise ValueError("state dimension does not match graph")
        v = self.transform
        return np.real(np.einsum("ia,ij,ja->a", v.conj(), rho.matrix, v))

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["a", "b", "m_a", "m_b", "frequency", "strength"])
            for k in range(self.n_edges):
                a, b = int(self.upper[k]), int(self.lower[k])
                writer.writerow(
                    [a, b, self.m_values[a], self.m_values[b],
                     repr(float(self.frequencies[k])), repr(float(self.strengths[k]))]
                )


def crush(rho: DensityMatrix) -> DensityMatrix:
    """Zero all off-diagonal elements, keeping the diagonal exactly.

    Models a gradient pulse; inside the pipeline it is applied in the
    secular eigenbasis so the survivors are eigenstate populations.
    """
    return DensityMatrix(
        matrix=np.diag(np.diag(rho.matrix)), convention=rho.convention
    )


def build_transition_graph(
    h_secular: Operator,
    basis: ZeemanBasis,
    threshold: float = STRENGTH_THRESHOLD,
) -> TransitionGraph:
    """Eigendecompose blockwise by m and enumerate allowed transitions.

    Args:
        h_secular: Hamiltonian commuting with collective I_z.
        basis: Zeeman basis (defines the m blocks).
        threshold: Keep edges with strength above ``threshold`` times the
            strongest one; separates symmetry-forbidden zeros from noise.
    """
    if h_secular.dim != basis.dim:
        raise ValueError("hamiltonian dimension does not match basis")
    mat = h_secular.matrix
    scale = max(np.linalg.norm(mat), 1e-300)
    block_m = np.rint(2 * basis.m) / 2.0
    for m in np.unique(block_m):
        inside = block_m == m
        off = mat[np.ix_(inside, ~inside)]
        if off.size and np.abs(off).max() > 1e-12 * scale:
            raise ValueError("hamiltonian does not conserve collective I_z")

    dim = basis.dim
    energies = np.empty(dim)
    m_values = np.empty(dim)
    transform = np.zeros((dim, dim), dtype=complex)
    index = 0
    for m in np.unique(block_m):  # ascending m
        states = np.where(block_m == m)[0]
        block_eigs, block_vecs = np.linalg.eigh(mat[np.ix_(states, states)])
        for k in range(states.size):
            energies[index] = block_eigs[k]
            m_values[index] = m
            transform[states, index] = block_vecs[:, k]
            index += 1

    # collective raising operator in the eigenbasis
    s = transform.conj().T @ _raising_matrix(basis) @ transform

    upper, lower, freqs, strengths = [], [], [], []
    for a in range(dim):
        for b in range(dim):
            if m_values[a] == m_values[b] + 1.0:
                upper.append(a)
                lower.append(b)
                freqs.append(energies[a] - energies[b])
                strengths.append(abs(s[a, b]) ** 2)
    freqs = np.array(freqs)
    strengths = np.array(strengths)
    keep = strengths > threshold * strengths.max(initial=0.0)
    ordering = np.lexsort((np.array(lower)[keep], np.array(upper)[keep], freqs[keep]))
    return TransitionGraph(
        energies=energies,
        m_values=m_values,
        transform=transform,
        upper=np.array(upper)[keep][ordering],
        lower=np.array(lower)[keep][ordering],
        frequencies=freqs[keep][ordering],
        strengths=strengths[keep][ordering],
    )


def _raising_matrix(basis: ZeemanBasis) -> np.ndarray:
    # sum_i I_i+ built directly from bit patterns
    dim = basis.dim
    out = np.zeros((dim, dim))
    for state in range(dim):
        for site in range(basis.n_spins):
            if not state & (1 << site):
                out[state | (1 << site), state] += 1.0
    return out


def saturate(
    populations: np.ndarray, graph: TransitionGraph, params: SaturationParams
) -> np.ndarray:
    """Relax eigenstate populations under envelope-weighted transitions.

    Timed mode integrates the rate equation for ``params.duration``
    exactly (spectral solution of the graph Laplacian).  Steady-state
    mode drops transitions whose envelope factor is below
    ``params.envelope_floor`` and then steps with doubling time spans
    until max |dp/dt| < 1e-12, which equalizes populations within each
    driven connected component and leaves the rest trapped.  Total
    population is conserved either way.
    """
    p0 = np.asarray(populations, dtype=float)
    if p0.shape != (graph.n_states,):
        raise ValueError(
            f"populations must have length {graph.n_states}, got {p0.shape}"
        )
    envelope = params.envelope(graph.frequencies)
    weights = params.rate_scale * graph.strengths * envelope
    if params.mode == "steady_state":
        weights = np.where(envelope >= params.envelope_floor, weights, 0.0)

    w = np.zeros((graph.n_states, graph.n_states))
    np.add.at(w, (graph.upper, graph.lower), weights)
    w = w + w.T
    laplacian = np.diag(w.sum(axis=1)) - w
    if not w.any():
        return p0.copy()
    rates, modes = np.linalg.eigh(laplacian)
    coeffs = modes.T @ p0

    def propagate(span: float) -> np.ndarray:
        return modes @ (np.exp(-np.clip(rates, 0.0, None) * span) * coeffs)

    if params.mode == "timed":
        return propagate(params.duration)

    span = 1.0 / rates.max()
    for _ in range(200):
        p = propagate(span)
        if np.abs(laplacian @ p).max() < _STEADY_STATE_TOL:
            return p
        span *= 2.0
    raise RuntimeError("saturation failed to reach steady state")
