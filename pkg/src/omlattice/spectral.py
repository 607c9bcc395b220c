"""Diagonalization, edge-state detection and the SSH winding number."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import QuadraticHamiltonian


class GapClosingError(ValueError):
    """The bulk gap closes, so the winding number is undefined."""


@dataclass
class SpectrumResult:
    """Eigenpairs plus per-state localization data.

    ``ipr``, ``left_weight`` and ``right_weight`` are computed from site
    probabilities; for doubled-basis (bosonic) eigenvectors the particle and
    hole weights of each site are summed first.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    ipr: np.ndarray = field(default=None)
    left_weight: np.ndarray = field(default=None)
    right_weight: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.ipr is None:
            w = site_weights(self.eigenvectors)
            half = w.shape[0] // 2
            self.ipr = (w**2).sum(axis=0)
            self.left_weight = w[:half].sum(axis=0)
            self.right_weight = w[w.shape[0] - half :].sum(axis=0)

    @property
    def size(self) -> int:
        return len(self.eigenvalues)

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.eigenvalues)


def site_weights(vectors: np.ndarray, sites: int | None = None) -> np.ndarray:
    """Normalized probability per site for each column of ``vectors``."""
    p = np.abs(vectors) ** 2
    if sites is not None and p.shape[0] == 2 * sites:
        p = p[:sites] + p[sites:]
    norm = p.sum(axis=0)
    norm[norm == 0] = 1.0
    return p / norm


def _fix_phases(vecs: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Rotate each column so its first non-negligible component is real positive."""
    out = vecs.astype(complex, copy=True)
    for k in range(out.shape[1]):
        col = out[:, k]
        nz = np.flatnonzero(np.abs(col) > tol * np.abs(col).max())
        if nz.size:
            c = col[nz[0]]
            out[:, k] = col * (abs(c) / c)
    return out


def eig_hermitian(h: np.ndarray, tol: float = 1e-10) -> SpectrumResult:
    """Ascending eigenvalues and phase-fixed orthonormal eigenvectors of a Hermitian matrix."""
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("matrix must be square")
    scale = max(np.linalg.norm(h), 1.0)
    if np.linalg.norm(h - h.conj().T) > tol * scale:
        raise ValueError("matrix is not Hermitian")
    evals, evecs = np.linalg.eigh(h)
    return SpectrumResult(evals, _fix_phases(evecs))


def bosonic_dynamical_spectrum(qh: QuadraticHamiltonian) -> SpectrumResult:
    """Eigenvalues of ``Sz M`` sorted by (real part, imaginary part).

    Eigenvalues with a nonzero imaginary part signal parametric instability.
    """
    qh.check()
    evals, evecs = np.linalg.eig(qh.dynamical_matrix())
    order = np.lexsort((np.round(evals.imag, 12), np.round(evals.real, 12)))
    evals, evecs = evals[order], evecs[:, order]
    evecs = _fix_phases(evecs / np.linalg.norm(evecs, axis=0))
    w = site_weights(evecs, qh.dim)
    half = qh.dim // 2
    return SpectrumResult(
        evals.astype(complex),
        evecs,
        ipr=(w**2).sum(axis=0),
        left_weight=w[:half].sum(axis=0),
        right_weight=w[qh.dim - half :].sum(axis=0),
    )


@dataclass
class EdgeStateReport:
    """In-gap localized states, after splitting near-degenerate multiplets by side."""

    indices: list
    sides: list
    energies: np.ndarray
    localization_lengths: np.ndarray
    vectors: np.ndarray
    ipr: np.ndarray

    def __len__(self) -> int:
        return len(self.indices)


def default_gap_window(v: float, w: float) -> float:
    """Half-width ``0.5 |w - v|`` of the mid-gap window for bond magnitudes ``v``, ``w``."""
    return 0.5 * abs(abs(w) - abs(v))


def _localization_length(weights: np.ndarray, side: str) -> float:
    """Decay length (in two-site cells) of the probability envelope from the given edge."""
    w = weights if side != "right" else weights[::-1]
    n_cells = max(len(w) // 2, 1)
    cells = np.array([w[2 * c : 2 * c + 2].sum() for c in range(n_cells)])
    cells = cells[: max(n_cells // 2, 2)]
    start = int(np.argmax(cells))
    above = cells[start:] > 1e-13 * cells[start]
    # fit only the stretch before the envelope hits the numerical floor
    stop = start + (int(np.argmin(above)) if not above.all() else above.size)
    if stop - start < 2:
        return 0.0
    x = np.arange(start, stop)
    y = np.log(cells[start:stop])
    slope = np.polyfit(x, y, 1)[0]
    if slope >= 0:
        return math.inf
    # |psi|^2 ~ exp(-2 x / xi)
    return float(-2.0 / slope)


def _side_label(weights: np.ndarray, edge_fraction: float) -> str:
    m = len(weights)
    ne = max(int(math.ceil(edge_fraction * m)), 1)
    wl, wr = weights[:ne].sum(), weights[m - ne :].sum()
    tot = wl + wr
    if tot == 0:
        return "both"
    if wl >= 0.9 * tot:
        return "left"
    if wr >= 0.9 * tot:
        return "right"
    return "both"


def detect_edge_states(
    spectrum: SpectrumResult,
    gap_window: float,
    ipr_threshold: float | None = None,
    edge_fraction: float = 0.1,
    degeneracy_tol: float = 1e-8,
) -> EdgeStateReport:
    """Report localized states with ``|E| < gap_window``.

    Candidates whose energies lie within ``degeneracy_tol`` of each other are
    rotated into eigenvectors of the left-half projector before thresholding,
    so a hybridized zero-mode pair is reported as one left and one right state.
    """
    if spectrum.size == 0:
        raise ValueError("empty spectrum")
    evals = np.asarray(spectrum.eigenvalues)
    if np.iscomplexobj(evals):
        evals = evals.real
    vecs = spectrum.eigenvectors
    m = vecs.shape[0]
    if ipr_threshold is None:
        ipr_threshold = 4.0 / m
    cand = np.flatnonzero(np.abs(evals) < gap_window)

    groups: list[list[int]] = []
    for k in cand:
        if groups and abs(evals[k] - evals[groups[-1][-1]]) < degeneracy_tol:
            groups[-1].append(int(k))
        else:
            groups.append([int(k)])

    half = m // 2
    indices, sides, energies, lengths, out_vecs, iprs = [], [], [], [], [], []
    for g in groups:
        sub = vecs[:, g]
        coeffs = np.eye(len(g))
        if len(g) > 1:
            proj = sub[:half].conj().T @ sub[:half]
            _, coeffs = np.linalg.eigh(proj)
            coeffs = coeffs[:, ::-1]
            sub = sub @ coeffs
        for c in range(len(g)):
            psi = sub[:, c]
            w = np.abs(psi) ** 2
            w = w / w.sum()
            ipr = float((w**2).sum())
            if ipr <= ipr_threshold:
                continue
            side = _side_label(w, edge_fraction)
            indices.append(g[c])
            sides.append(side)
            energies.append(float(np.sum(np.abs(coeffs[:, c]) ** 2 * evals[g])))
            lengths.append(_localization_length(w, "left" if side == "both" else side))
            out_vecs.append(psi)
            iprs.append(ipr)
    return EdgeStateReport(
        indices=indices,
        sides=sides,
        energies=np.array(energies),
        localization_lengths=np.array(lengths),
        vectors=np.array(out_vecs).T if out_vecs else np.zeros((m, 0), dtype=complex),
        ipr=np.array(iprs),
    )


def winding_number(v: float, w: float, n_k: int = 4096) -> int:
    """Winding of ``h(k) = v + w exp(-ik)`` around the origin for ``k`` in ``[0, 2 pi)``.

    Computed by summing wrapped phase increments, so it is 1 when ``|v| < |w|``
    and 0 otherwise.
    """
    if abs(abs(v) - abs(w)) <= 1e-12:
        raise GapClosingError(f"gap closes at |v| = |w| = {abs(v)}")
    k = np.linspace(0.0, 2 * np.pi, n_k + 1)
    hk = v + w * np.exp(-1j * k)
    dphi = np.angle(hk[1:] / hk[:-1])
    # e^{-ik} runs clockwise; count windings in the direction of increasing k for w
    return int(round(-dphi.sum() / (2 * np.pi)))


def bulk_gap(spectrum: SpectrumResult, exclude=(), reference: float = 0.0) -> float:
    """Separation between the bulk levels just above and just below ``reference``."""
    e = np.delete(np.asarray(spectrum.eigenvalues).real, list(exclude))
    above, below = e[e > reference], e[e < reference]
    if above.size == 0 or below.size == 0:
        return 0.0
    return float(above.min() - below.max())


def quasiparticle_gap(energies, zero_tol: float = 1e-6) -> float:
    """Smallest ``|E|`` among levels that are not zero modes."""
    a = np.abs(np.asarray(energies).real)
    a = a[a >= zero_tol]
    return float(a.min()) if a.size else 0.0


def count_zero_modes(energies, zero_tol: float = 1e-6) -> int:
    return int(np.sum(np.abs(np.asarray(energies)) < zero_tol))


def central_spacing_ratio(energies, window: float, merge_tol: float = 1e-9) -> float:
    """Largest level spacing with ``|E| < window`` over the median spacing of the whole spectrum.

    Degenerate levels (closer than ``merge_tol``) are merged first. A gapped
    spectrum gives a large ratio; a continuous band gives a ratio of order one.
    """
    e = np.sort(np.asarray(energies).real)
    distinct = [e[0]]
    for x in e[1:]:
        if x - distinct[-1] > merge_tol:
            distinct.append(x)
    distinct = np.array(distinct)
    if distinct.size < 3:
        raise ValueError("too few distinct levels")
    gaps = np.diff(distinct)
    mids = 0.5 * (distinct[1:] + distinct[:-1])
    inner = gaps[(np.abs(distinct[1:]) < window) | (np.abs(distinct[:-1]) < window) | (np.abs(mids) < window)]
    return float(inner.max() / np.median(gaps))
