"""Integer-order Bessel functions of the first kind and their zeros.

Values are delegated to :func:`scipy.special.jv`, which is accurate well
beyond the 1e-12 absolute level on the supported domain. Zeros are located by
scanning for sign changes and polishing with Brent's method.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import optimize, special

MAX_ORDER = 64

# zeros of J_m are spaced by more than 2.4, so this scan step never skips one
_SCAN_STEP = 0.25
_SCAN_LIMIT = 2000.0


class BracketError(RuntimeError):
    """A Bessel zero could not be bracketed."""


def bessel_j(order: int, x):
    """Bessel function of the first kind ``J_order(x)``.

    Parameters
    ----------
    order : int
        Integer order, ``|order| <= 64``. Negative orders use
        ``J_{-m}(x) = (-1)^m J_m(x)``.
    x : float or array_like
        Finite real argument(s).

    Returns
    -------
    float or ndarray
    """
    if int(order) != order:
        raise ValueError(f"order must be an integer, got {order!r}")
    order = int(order)
    if abs(order) > MAX_ORDER:
        raise ValueError(f"|order| must be <= {MAX_ORDER}, got {order}")
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("Bessel argument must be finite")
    val = special.jv(abs(order), arr)
    if order < 0 and order % 2:
        val = -val
    return float(val) if val.ndim == 0 else val


@dataclass(frozen=True)
class BesselZeroRequest:
    """The ``index``-th positive zero of ``J_order``."""

    order: int
    index: int

    def __post_init__(self):
        if abs(self.order) > MAX_ORDER:
            raise ValueError(f"|order| must be <= {MAX_ORDER}")
        if self.index < 1:
            raise ValueError("zero index must be >= 1")


def bessel_zero(order: int | BesselZeroRequest, index: int | None = None) -> float:
    """Return the ``index``-th positive zero of ``J_order``.

    Either call as ``bessel_zero(2, 1)`` or ``bessel_zero(BesselZeroRequest(2, 1))``.
    """
    req = order if isinstance(order, BesselZeroRequest) else BesselZeroRequest(int(order), int(index))
    m = abs(req.order)  # J_{-m} and J_m share their zeros
    f = lambda x: special.jv(m, x)  # noqa: E731

    # every positive zero of J_m lies beyond x = m
    lo = max(float(m), 1e-3)
    flo = f(lo)
    found = 0
    while lo < _SCAN_LIMIT:
        hi = lo + _SCAN_STEP
        fhi = f(hi)
        if flo == 0.0:
            found += 1
            if found == req.index:
                return lo
        elif flo * fhi < 0.0:
            found += 1
            if found == req.index:
                root = optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
                if abs(f(root)) > 1e-10:
                    raise BracketError(f"polished zero of J_{m} is not a root: J({root}) = {f(root)}")
                return float(root)
        lo, flo = hi, fhi
    raise BracketError(f"could not bracket zero #{req.index} of J_{req.order} below x = {_SCAN_LIMIT}")


def kappas_from_modulation(params, regime: Literal["A", "B"], spec=None) -> np.ndarray:
    """Bessel arguments of the resonant terms for each resonator.

    Regime ``"A"`` returns rows ``(l_n - g_n, l_n + g_n, l_{n+1} - g_n, l_{n+1} + g_n)``
    and regime ``"B"`` returns ``(2 l_n, l_{n+1} + l_n)``, with ``l`` the cavity
    and ``g`` the resonator modulation strengths. A resonator without a right
    neighbour cavity (equal-count lattice) gets NaN in the right-bond columns.
    """
    lam = np.asarray(params.lam, dtype=float)
    gam = np.asarray(params.gamma, dtype=float)
    if spec is not None:
        params.validate(spec)
    n_res = gam.size
    if lam.size not in (n_res, n_res + 1):
        raise ValueError(f"need {n_res} or {n_res + 1} cavity strengths, got {lam.size}")
    lam_next = np.full(n_res, np.nan)
    lam_next[: lam.size - 1] = lam[1:]
    lam_here = lam[:n_res]
    if regime == "A":
        return np.column_stack([lam_here - gam, lam_here + gam, lam_next - gam, lam_next + gam])
    if regime == "B":
        return np.column_stack([2.0 * lam_here, lam_next + lam_here])
    raise ValueError(f"regime must be 'A' or 'B', got {regime!r}")
