"""Weak-coupling transfer protocol: envelopes, scans and optimal-time search.

The slow scale of a weak-coupling transfer is the second-order splitting
delta_omega of the block-localised doublets, giving an envelope period
tau = pi / delta_omega; on top of it the block-internal dynamics oscillates on
the O(1/J) scale.  Searches therefore do a dense coarse scan (resolving the
fast scale) followed by a local golden-section refinement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .amplitudes import (
    require_free_fermion,
    transfer_amplitude_series,
    transfer_amplitudes,
    transition_matrix,
)
from .basis import subsets_by_excitation
from .chain import ChainSpec, ResonanceReport, resonance_report, spectral
from .errors import ResonanceError
from .fidelity import transfer_fidelity_terms
from .linalg import EigenDecomposition

_SCAN_CHUNK = 1 << 14
_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def reduced_amplitude(
    decomp: EigenDecomposition, cluster, i: int, j: int, t: float
) -> complex:
    """Transition amplitude i -> j keeping only the given spectral levels (1-indexed).

    With the cluster set to the quasi-degenerate transfer levels this is the
    second-order approximation of the full amplitude; with all levels it is
    exact.
    """
    ks = np.asarray(sorted(cluster), dtype=int) - 1
    if ks.size == 0:
        raise ValueError("cluster must be nonempty")
    if ks[0] < 0 or ks[-1] >= decomp.size:
        raise ValueError("cluster level out of range")
    phases = np.exp(-1j * decomp.eigenvalues[ks] * t)
    return complex(np.sum(phases * decomp.eigenvectors[j - 1, ks] * decomp.eigenvectors[i - 1, ks]))


def transfer_envelope(spec: ChainSpec, n: int, form: str = "sin4") -> Callable[[np.ndarray], np.ndarray]:
    """Slow envelope of the transfer fidelity, peaking at t = tau = pi / delta_omega.

    `form` selects sin^4(delta_omega t / 2) (default) or the plain two-level
    sin^2 profile; both peak at tau, they differ in the shoulder shape.
    """
    if form not in ("sin4", "sin2"):
        raise ValueError(f"unknown envelope form {form!r}")
    delta_omega = resonance_report(spec, n).delta_omega
    power = 4 if form == "sin4" else 2

    def envelope(t):
        return np.sin(delta_omega * np.asarray(t) / 2.0) ** power

    return envelope


@dataclass(frozen=True)
class FidelityScan:
    """Average transfer fidelity and its ingredients over a time grid."""

    block_size: int
    times: np.ndarray
    fidelity: np.ndarray
    classical_term: np.ndarray  # random guess + transition probabilities
    quantum_term: np.ndarray
    envelope: np.ndarray | None
    amplitudes: dict[tuple[int, ...], np.ndarray]
    report: ResonanceReport | None

    def amplitude_moduli(self) -> dict[tuple[int, ...], np.ndarray]:
        return {s: np.abs(a) for s, a in self.amplitudes.items()}


def _series_terms(amps: dict[tuple[int, ...], np.ndarray], d: int):
    total = None
    psum = None
    for series in amps.values():
        total = series.copy() if total is None else total + series
        p = np.abs(series) ** 2
        psum = p if psum is None else psum + p
    fidelity = 1.0 / (d + 1) + np.abs(1.0 + total) ** 2 / (d * (d + 1))
    classical = 1.0 / d + psum / (d * (d + 1))
    return fidelity, classical, fidelity - classical


def scan_values(spec: ChainSpec, n: int, times: np.ndarray) -> np.ndarray:
    """Average transfer fidelity on a time grid (vectorised, chunked)."""
    require_free_fermion(spec)
    decomp = spectral(spec)
    d = 2**n
    times = np.asarray(times, dtype=float)
    out = np.empty(times.shape, dtype=float)
    for lo in range(0, times.size, _SCAN_CHUNK):
        chunk = times[lo : lo + _SCAN_CHUNK]
        amps = transfer_amplitude_series(decomp, n, chunk)
        out[lo : lo + _SCAN_CHUNK] = _series_terms(amps, d)[0]
    return out


def fidelity_scan(spec: ChainSpec, n: int, t_grid) -> FidelityScan:
    """Scan the average transfer fidelity, its decomposition and all subset amplitudes."""
    require_free_fermion(spec)
    decomp = spectral(spec)
    d = 2**n
    times = np.asarray(t_grid, dtype=float)
    subsets = subsets_by_excitation(n, include_empty=False)
    amps = {s: np.empty(times.shape, dtype=complex) for s in subsets}
    for lo in range(0, times.size, _SCAN_CHUNK):
        chunk = times[lo : lo + _SCAN_CHUNK]
        part = transfer_amplitude_series(decomp, n, chunk)
        for s in subsets:
            amps[s][lo : lo + len(chunk)] = part[s]
    fidelity, classical, quantum = _series_terms(amps, d)

    report = None
    envelope = None
    if n in (3, 4) and spec.wire_length >= 1:
        try:
            report = resonance_report(spec, n)
            envelope = np.sin(report.delta_omega * times / 2.0) ** 4
        except (ValueError, ResonanceError):
            report = None
    return FidelityScan(
        block_size=n,
        times=times,
        fidelity=fidelity,
        classical_term=classical,
        quantum_term=quantum,
        envelope=envelope,
        amplitudes=amps,
        report=report,
    )


@dataclass(frozen=True)
class ProtocolResult:
    """Outcome of an optimal-time search over one scan window."""

    optimal_time: float
    fidelity_at_optimum: float
    envelope_period: float | None
    cluster: ResonanceReport | None
    times: np.ndarray
    fidelity: np.ndarray
    readout_times: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def time_series(self) -> tuple[np.ndarray, np.ndarray]:
        return self.times, self.fidelity


def _phase_aligned_values(spec: ChainSpec, times: np.ndarray) -> np.ndarray:
    """Single-qubit average fidelity after aligning the receiver phase, so only |f| matters."""
    series = transfer_amplitude_series(spectral(spec), 1, np.atleast_1d(times))[(1,)]
    f = np.abs(series)
    return 0.5 + f**2 / 6.0 + f / 3.0


def find_optimal_time(
    spec: ChainSpec,
    n: int,
    window: tuple[float, float] | None = None,
    coarse_points: int | None = None,
    refine_iters: int = 80,
    phase_aligned: bool = False,
) -> ProtocolResult:
    """Locate the best transfer time by a coarse scan plus golden-section refinement.

    Without an explicit window the scan covers [0, 1.2 tau].  The coarse grid
    must resolve the fast block dynamics; the default spacing is 0.2 in units
    of 1/J.  `phase_aligned` applies only to single-site blocks and scores
    |f| with the optimal receiver phase instead of the raw amplitude.
    """
    require_free_fermion(spec)
    if phase_aligned and n != 1:
        raise ValueError("phase alignment is only defined for single-site blocks")

    report = None
    tau = None
    if window is None:
        report = resonance_report(spec, n)
        tau = report.transfer_time
        window = (0.0, 1.2 * tau)
    elif n in (3, 4) and spec.wire_length >= 1:
        try:
            report = resonance_report(spec, n)
            tau = report.transfer_time
        except (ValueError, ResonanceError):
            report = None
    lo, hi = float(window[0]), float(window[1])
    if not hi > lo:
        raise ValueError(f"empty search window ({lo}, {hi})")
    if coarse_points is None:
        coarse_points = int(np.ceil((hi - lo) / 0.2)) + 1
    coarse_points = max(coarse_points, 2)

    times = np.linspace(lo, hi, coarse_points)
    if phase_aligned:
        values = _phase_aligned_values(spec, times)

        def objective(t: float) -> float:
            return float(_phase_aligned_values(spec, np.array([t]))[0])
    else:
        values = scan_values(spec, n, times)
        decomp = spectral(spec)
        d = 2**n

        def objective(t: float) -> float:
            amps = transfer_amplitudes(transition_matrix(decomp, t), n)
            return transfer_fidelity_terms(amps, d).total

    best = int(np.argmax(values))
    spacing = times[1] - times[0]

    a = max(lo, times[best] - spacing)
    b = min(hi, times[best] + spacing)
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = objective(x1), objective(x2)
    for _ in range(refine_iters):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = objective(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = objective(x1)
    t_best = x1 if f1 >= f2 else x2
    f_best = max(f1, f2)
    if values[best] > f_best:  # keep the coarse point if refinement drifted off the peak
        t_best, f_best = float(times[best]), float(values[best])

    readout = times[values >= 0.99 * f_best]
    return ProtocolResult(
        optimal_time=float(t_best),
        fidelity_at_optimum=float(f_best),
        envelope_period=tau,
        cluster=report,
        times=times,
        fidelity=values,
        readout_times=readout,
    )
