"""Single-excitation quantum walks and full time-dependent propagation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import TimeDependentGenerator, sigma_z


_CHUNK = 2048


class ConvergenceError(RuntimeError):
    """Step refinement did not reach the requested symplectic accuracy."""


@dataclass
class WalkRecord:
    times: np.ndarray
    probabilities: np.ndarray  # shape (n_times, n_sites)
    initial_site: int


def quantum_walk(h: np.ndarray, initial_site: int, times) -> WalkRecord:
    """Occupation probabilities ``|<n| exp(-i h t) |initial>|^2`` for a single excitation.

    ``initial_site`` is a zero-based site index.
    """
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("h must be square")
    if np.linalg.norm(h - h.conj().T) > 1e-10 * max(np.linalg.norm(h), 1.0):
        raise ValueError("h must be Hermitian")
    m = h.shape[0]
    if not 0 <= initial_site < m:
        raise IndexError(f"initial site {initial_site} outside 0..{m - 1}")
    times = np.asarray(times, dtype=float)
    evals, evecs = np.linalg.eigh(h)
    coeff = evecs[initial_site].conj()  # <k|initial>
    phases = np.exp(-1j * np.outer(times, evals))
    amps = (phases * coeff) @ evecs.T
    return WalkRecord(times, np.abs(amps) ** 2, initial_site)


def walk_suppression_metric(record: WalkRecord, window: tuple[float, float] | None = None) -> float:
    """Time-averaged return probability to the initial site over ``window``.

    Averaging uses the trapezoid rule on the record's own time grid.
    """
    t = record.times
    lo, hi = (t[0], t[-1]) if window is None else window
    sel = (t >= lo - 1e-12) & (t <= hi + 1e-12)
    if sel.sum() < 2 or hi <= lo:
        raise ValueError("window must contain at least two samples")
    ts = t[sel]
    p = record.probabilities[sel, record.initial_site]
    return float(np.trapezoid(p, ts) / (ts[-1] - ts[0]))


@dataclass
class PropagatorRecord:
    times: np.ndarray
    propagators: np.ndarray  # shape (n_times, 2M, 2M)
    steps_per_period: int
    symplectic_defect: float


def _as_batch_generator(gen, period):
    if isinstance(gen, TimeDependentGenerator):
        return gen.batch, gen.period
    d = np.asarray(gen, dtype=complex)
    if d.ndim != 2:
        raise TypeError("generator must be a TimeDependentGenerator or a static matrix")
    # a static generator has no natural period; any step grid works
    return (lambda ts: np.broadcast_to(d, (len(ts),) + d.shape)), (period or 1.0)


def _rk4_run(batch, u0: np.ndarray, grid: np.ndarray, keep: np.ndarray) -> list:
    """Classical RK4 over ``grid``; returns U at the grid points flagged in ``keep``."""
    h = np.diff(grid)
    u = u0.copy()
    out = [u.copy()] if keep[0] else []
    for n in range(len(h)):
        if n % _CHUNK == 0:
            stop = min(n + _CHUNK, len(h))
            d_start = batch(grid[n : stop + 1])
            d_mid = batch(grid[n:stop] + 0.5 * h[n:stop])
        dt = h[n]
        r = n % _CHUNK
        a, b, c = d_start[r], d_mid[r], d_start[r + 1]
        k1 = -1j * (a @ u)
        k2 = -1j * (b @ (u + 0.5 * dt * k1))
        k3 = -1j * (b @ (u + 0.5 * dt * k2))
        k4 = -1j * (c @ (u + dt * k3))
        u = u + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if keep[n + 1]:
            out.append(u.copy())
    return out


def symplectic_defect(u: np.ndarray) -> float:
    """``|| U^+ Sz U - Sz ||`` (Frobenius)."""
    sz = sigma_z(u.shape[0] // 2)
    return float(np.linalg.norm(u.conj().T @ sz @ u - sz))


def propagate_full(
    gen,
    t_end: float,
    tol: float = 1e-6,
    samples=None,
    steps_per_period: int = 64,
    max_steps_per_period: int = 16384,
    period: float | None = None,
) -> PropagatorRecord:
    """Integrate ``dU/dt = -i D(t) U`` from ``U(0) = 1`` with fixed-step RK4.

    The step is an integer fraction of the modulation period, starting at
    ``steps_per_period`` and doubled until the symplectic defect at every
    sample is at most ``tol``. Sample times that fall between grid points are
    reached by splitting the enclosing interval evenly.

    ``gen`` may be a :class:`TimeDependentGenerator` or a static ``2M x 2M``
    dynamical matrix.
    """
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    batch, per = _as_batch_generator(gen, period)
    samples = np.array([0.0, t_end]) if samples is None else np.asarray(samples, dtype=float)
    if np.any(np.diff(samples) <= 0) or samples[0] < 0 or samples[-1] > t_end + 1e-12:
        raise ValueError("samples must increase within [0, t_end]")
    dim2 = batch([0.0]).shape[-1]
    u0 = np.eye(dim2, dtype=complex)

    spp = steps_per_period
    while spp <= max_steps_per_period:
        h_max = per / spp
        pieces, keep = [np.array([0.0])], [True] if samples[0] == 0 else [False]
        t_prev = 0.0
        for ts in samples:
            if ts == t_prev:
                continue
            n = int(np.ceil((ts - t_prev) / h_max - 1e-9))
            seg = np.linspace(t_prev, ts, n + 1)[1:]
            pieces.append(seg)
            keep.extend([False] * (n - 1) + [True])
            t_prev = ts
        grid = np.concatenate(pieces)
        us = np.array(_rk4_run(batch, u0, grid, np.array(keep)))
        defect = max(symplectic_defect(u) for u in us)
        if np.isfinite(defect) and defect <= tol:
            return PropagatorRecord(samples, us, spp, defect)
        spp *= 2
    raise ConvergenceError(f"symplectic defect {defect:.3e} > {tol:.1e} at {max_steps_per_period} steps per period")


def compare_effective(full: PropagatorRecord, h_eff: np.ndarray) -> np.ndarray:
    """Operator-norm distance between the particle block of ``U(t)`` and ``exp(-i h_eff t)``, halved."""
    h_eff = np.asarray(h_eff)
    m = h_eff.shape[0]
    if full.propagators.shape[-1] != 2 * m:
        raise ValueError(f"h_eff has dimension {m}, propagators need {full.propagators.shape[-1] // 2}")
    evals, evecs = np.linalg.eigh(h_eff)
    eps = np.empty(len(full.times))
    for n, (t, u) in enumerate(zip(full.times, full.propagators)):
        ref = (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T
        eps[n] = np.linalg.norm(u[:m, :m] - ref, 2) / 2
    return eps
