"""Linear-response stick spectra: synthesis, merging, counting, broadening.

Line intensities are population differences times single-quantum
transition strengths, with the uniform small-flip-angle prefactor
dropped (it cancels in every ratio of interest).  Intensities keep their
sign: absorption is positive when the lower-m state of a transition is
the more populated one.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .nonunitary import TransitionGraph
from .spin_core import _frozen_array

ZERO_SUM_DROP = 1e-8


@dataclass(frozen=True)
class StickSpectrum:
    """A list of (frequency, intensity) lines, optionally merged."""

    frequencies: np.ndarray = field(repr=False)
    intensities: np.ndarray = field(repr=False)
    merged: bool = False
    merge_tolerance: float | None = None

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        i = np.asarray(self.intensities, dtype=float)
        if f.shape != i.shape or f.ndim != 1:
            raise ValueError("frequencies and intensities must be matching vectors")
        if self.merged and f.size > 1 and np.diff(f).min() <= 0:
            raise ValueError("merged spectrum must have ascending frequencies")
        object.__setattr__(self, "frequencies", _frozen_array(f))
        object.__setattr__(self, "intensities", _frozen_array(i))

    @property
    def n_lines(self) -> int:
        return self.frequencies.shape[0]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["frequency", "intensity"])
            for f, i in zip(self.frequencies, self.intensities):
                writer.writerow([repr(float(f)), repr(float(i))])


def linear_response(populations: np.ndarray, graph: TransitionGraph) -> StickSpectrum:
    """One line per allowed transition, intensity (p_lower - p_upper) * strength."""
    p = np.asarray(populations, dtype=float)
    if p.shape != (graph.n_states,):
        raise ValueError(
            f"populations must have length {graph.n_states}, got {p.shape}"
        )
    intensities = (p[graph.lower] - p[graph.upper]) * graph.strengths
    return StickSpectrum(frequencies=graph.frequencies, intensities=intensities)


def merge_peaks(spectrum: StickSpectrum, tolerance: float) -> StickSpectrum:
    """Coalesce lines by transitive clustering on the sorted frequencies.

    Each cluster becomes one line at the |intensity|-weighted mean
    frequency with the summed intensity; clusters whose sum cancels below
    ``ZERO_SUM_DROP`` of the largest merged line are dropped.
    """
    if tolerance <= 0:
        raise ValueError("merge tolerance must be positive")
    order = np.argsort(spectrum.frequencies, kind="stable")
    freqs = spectrum.frequencies[order]
    ints = spectrum.intensities[order]
    out_f, out_i = [], []
    start = 0
    for stop in range(1, freqs.size + 1):
        if stop < freqs.size and freqs[stop] - freqs[stop - 1] <= tolerance:
            continue
        chunk_f, chunk_i = freqs[start:stop], ints[start:stop]
        weight = np.abs(chunk_i).sum()
        if weight > 0:
            out_f.append(float(np.average(chunk_f, weights=np.abs(chunk_i))))
        else:
            out_f.append(float(chunk_f.mean()))
        out_i.append(float(chunk_i.sum()))
        start = stop
    out_f = np.array(out_f)
    out_i = np.array(out_i)
    if out_i.size:
        keep = np.abs(out_i) >= ZERO_SUM_DROP * np.abs(out_i).max()
        out_f, out_i = out_f[keep], out_i[keep]
    return StickSpectrum(
        frequencies=out_f, intensities=out_i, merged=True, merge_tolerance=tolerance
    )


def count_peaks(spectrum: StickSpectrum, intensity_floor: float = 1e-8) -> int:
    """Number of merged lines above ``intensity_floor`` times the largest."""
    if not spectrum.merged:
        raise ValueError("count_peaks requires a merged spectrum")
    if spectrum.n_lines == 0:
        return 0
    magnitudes = np.abs(spectrum.intensities)
    return int(np.sum(magnitudes > intensity_floor * magnitudes.max()))


def broaden(spectrum: StickSpectrum, linewidth: float, grid: np.ndarray) -> np.ndarray:
    """Sample a sum of Lorentzians (half width ``linewidth``) on ``grid``.

    Each line contributes intensity / (1 + ((f - f0)/linewidth)^2), so
    its integral is pi * linewidth * intensity.
    """
    if linewidth <= 0:
        raise ValueError("linewidth must be positive")
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("frequency grid is empty")
    if spectrum.n_lines == 0:
        return np.zeros_like(grid)
    detuning = (grid[:, np.newaxis] - spectrum.frequencies[np.newaxis, :]) / linewidth
    return (spectrum.intensities[np.newaxis, :] / (1.0 + detuning**2)).sum(axis=1)


def curve_to_csv(grid: np.ndarray, amplitudes: np.ndarray, path: str | Path) -> None:
    """Write a broadened curve as (frequency, amplitude) CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frequency", "amplitude"])
        for f, a in zip(grid, amplitudes):
            writer.writerow([repr(float(f)), repr(float(a))])
