"""Lattice geometry, parameter records and Hamiltonian builders.

Sites are interleaved: cavity ``a_n`` sits at index ``2n`` and resonator
``b_n`` at ``2n + 1`` (zero-based), so cavities occupy the even indices here,
which are the odd sites in one-based counting. A chain has either one more
cavity than resonators (odd total size) or equal counts (even total size).

Quadratic bosonic Hamiltonians are stored as a hopping matrix ``h`` and a
symmetric pairing matrix ``P``::

    H = sum_ij h_ij a_i^+ a_j + sum_{i<j} (P_ij a_i^+ a_j^+ + h.c.)

In the doubled basis ``(a, a^+)`` the quadratic form is
``M = [[h, P], [P*, h*]]`` and the Heisenberg equations read
``d/dt (a, a^+) = -i Sz M (a, a^+)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .special import bessel_j, kappas_from_modulation

ArrayLike = Union[float, Sequence[float], np.ndarray]

HERMITIAN_TOL = 1e-12


def _broadcast(value, n: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValueError(f"{name} must be a scalar or have length {n}, got shape {arr.shape}")
    return arr.copy()


@dataclass(frozen=True)
class LatticeSpec:
    """Cavity/resonator counts of a one-dimensional chain."""

    num_cavities: int
    num_resonators: int

    def __post_init__(self):
        if self.num_cavities < 1 or self.num_resonators < 0:
            raise ValueError("need at least one cavity and a non-negative resonator count")
        if self.num_cavities not in (self.num_resonators, self.num_resonators + 1):
            raise ValueError(
                "num_cavities must equal num_resonators or num_resonators + 1, "
                f"got {self.num_cavities}/{self.num_resonators}"
            )

    @classmethod
    def from_sites(cls, total_sites: int) -> "LatticeSpec":
        """Chain with ``total_sites`` sites: N+1/N when odd, N/N when even."""
        if total_sites < 1:
            raise ValueError("total_sites must be positive")
        n_res = total_sites // 2
        return cls(total_sites - n_res, n_res)

    @property
    def total_sites(self) -> int:
        return self.num_cavities + self.num_resonators

    @property
    def parity(self) -> str:
        return "odd" if self.num_cavities == self.num_resonators + 1 else "even"

    @property
    def num_right_bonds(self) -> int:
        """Number of resonators coupled to a cavity on their right."""
        return self.num_cavities - 1

    def cavity(self, n: int) -> int:
        """Site index of cavity ``n`` (zero-based)."""
        return 2 * n

    def resonator(self, n: int) -> int:
        """Site index of resonator ``n`` (zero-based)."""
        return 2 * n + 1


@dataclass
class ModulationParams:
    """Frequency-modulation settings of the rotating-frame model.

    Frequencies are in units of a reference frequency, phases in radians.
    """

    lam: np.ndarray
    gamma: np.ndarray
    nu: float
    phi: float
    omega_b: np.ndarray
    delta_a: np.ndarray

    @classmethod
    def uniform(cls, spec: LatticeSpec, lam, gamma, nu, phi=0.0, omega_b=None, delta_a=None):
        """Broadcast scalars over the lattice; ``omega_b`` and ``delta_a`` default to ``nu``."""
        omega_b = nu if omega_b is None else omega_b
        delta_a = omega_b if delta_a is None else delta_a
        params = cls(
            lam=_broadcast(lam, spec.num_cavities, "lam"),
            gamma=_broadcast(gamma, spec.num_resonators, "gamma"),
            nu=float(nu),
            phi=float(phi),
            omega_b=_broadcast(omega_b, spec.num_resonators, "omega_b"),
            delta_a=_broadcast(delta_a, spec.num_cavities, "delta_a"),
        )
        params.validate(spec)
        return params

    def validate(self, spec: LatticeSpec) -> None:
        if not self.nu > 0:
            raise ValueError("modulation frequency nu must be positive")
        ob = np.asarray(self.omega_b, dtype=float)
        if ob.size and not np.all(ob > 0):
            raise ValueError("resonator frequencies must be positive")
        for name, arr, n in (
            ("lam", self.lam, spec.num_cavities),
            ("delta_a", self.delta_a, spec.num_cavities),
            ("gamma", self.gamma, spec.num_resonators),
            ("omega_b", self.omega_b, spec.num_resonators),
        ):
            if np.asarray(arr).shape != (n,):
                raise ValueError(f"{name} must have length {n}")


@dataclass
class CouplingProfile:
    """Signed effective couplings.

    ``g_left[n]`` couples resonator ``n`` to cavity ``n`` and ``g_right[n]`` to
    cavity ``n + 1``; ``t_cavity`` is the direct cavity-cavity hopping. Each
    field may be a scalar, broadcast over the lattice.
    """

    g_left: ArrayLike
    g_right: ArrayLike
    t_cavity: ArrayLike = 0.0

    def arrays(self, spec: LatticeSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        gl = _broadcast(self.g_left, spec.num_resonators, "g_left")
        gr = _broadcast(self.g_right, spec.num_right_bonds, "g_right")
        t = _broadcast(self.t_cavity, spec.num_cavities - 1, "t_cavity")
        return gl, gr, t


@dataclass
class QuadraticHamiltonian:
    """Hopping and pairing blocks of a quadratic bosonic Hamiltonian."""

    hopping: np.ndarray
    pairing: np.ndarray
    basis_note: str = "interleaved"

    def __post_init__(self):
        self.hopping = np.asarray(self.hopping, dtype=complex)
        self.pairing = np.asarray(self.pairing, dtype=complex)
        if self.hopping.shape != self.pairing.shape or self.hopping.ndim != 2:
            raise ValueError("hopping and pairing must be square matrices of equal shape")

    @property
    def dim(self) -> int:
        return self.hopping.shape[0]

    def check(self, tol: float = HERMITIAN_TOL) -> None:
        """Raise if the hopping block is not Hermitian or pairing not symmetric."""
        h, p = self.hopping, self.pairing
        scale = max(np.linalg.norm(h), np.linalg.norm(p), 1.0)
        if np.linalg.norm(h - h.conj().T) > tol * scale:
            raise ValueError("hopping block is not Hermitian")
        if np.linalg.norm(p - p.T) > tol * scale:
            raise ValueError("pairing block is not symmetric")

    def quadratic_form(self) -> np.ndarray:
        """``M = [[h, P], [P*, h*]]`` in the doubled basis."""
        h, p = self.hopping, self.pairing
        return np.block([[h, p], [p.conj(), h.conj()]])

    def dynamical_matrix(self) -> np.ndarray:
        """``Sz M``, the generator of first-moment dynamics."""
        return sigma_z(self.dim) @ self.quadratic_form()

    @property
    def has_pairing(self) -> bool:
        return bool(np.any(self.pairing != 0))


def sigma_z(dim: int) -> np.ndarray:
    return np.diag(np.concatenate([np.ones(dim), -np.ones(dim)]))


def _kappa_table(kappas, spec: LatticeSpec, width: int, regime: str) -> np.ndarray:
    if isinstance(kappas, ModulationParams):
        return kappas_from_modulation(kappas, regime, spec)
    k = np.asarray(kappas, dtype=float)
    if k.ndim == 1:
        if k.shape != (width,):
            raise ValueError(f"kappas must have {width} entries per resonator")
        k = np.tile(k, (spec.num_resonators, 1))
    if k.shape != (spec.num_resonators, width):
        raise ValueError(f"kappas must have shape ({spec.num_resonators}, {width}), got {k.shape}")
    # right-bond arguments of a resonator without right neighbour are unused
    half = width // 2
    if not (np.all(np.isfinite(k[:, :half])) and np.all(np.isfinite(k[: spec.num_right_bonds, half:]))):
        raise ValueError("kappa arguments must be finite")
    return k


def _set_bond(mat: np.ndarray, i: int, j: int, value: complex, hermitian: bool) -> None:
    mat[i, j] += value
    mat[j, i] += np.conj(value) if hermitian else value


def _chain_blocks(spec: LatticeSpec, left, right, pair_left=None, pair_right=None):
    m = spec.total_sites
    h = np.zeros((m, m), dtype=complex)
    p = np.zeros((m, m), dtype=complex)
    for n in range(spec.num_resonators):
        a, b = spec.cavity(n), spec.resonator(n)
        _set_bond(h, a, b, left[n], True)
        if pair_left is not None:
            _set_bond(p, a, b, pair_left[n], False)
        if n < spec.num_right_bonds:
            a2 = spec.cavity(n + 1)
            _set_bond(h, a2, b, right[n], True)
            if pair_right is not None:
                _set_bond(p, a2, b, pair_right[n], False)
    return h, p


def build_regime_a(spec: LatticeSpec, couplings: CouplingProfile, kappas, include_residual_stokes: bool = False):
    """Resonant Hamiltonian of the Bessel-modulated hopping scheme.

    Intra-cell bonds carry ``-G_n J0(k1)``, inter-cell bonds ``G_{n+1} J0(k3)``.
    With ``include_residual_stokes`` the resonant two-mode squeezing terms
    ``-G_n J_{-2}(k2)`` and ``G_{n+1} J_{-2}(k4)`` are kept; they vanish when
    ``k2`` and ``k4`` sit on zeros of ``J_2``.

    ``kappas`` is a 4-tuple (broadcast), an ``(N, 4)`` array or a
    :class:`ModulationParams` from which the arguments are derived.
    """
    gl, gr, _ = couplings.arrays(spec)
    k = _kappa_table(kappas, spec, 4, "A")
    nb = spec.num_right_bonds
    left = -gl * bessel_j(0, k[:, 0])
    right = gr * bessel_j(0, np.nan_to_num(k[:nb, 2]))
    pl = pr = None
    if include_residual_stokes:
        pl = -gl * bessel_j(-2, k[:, 1])
        pr = gr * bessel_j(-2, np.nan_to_num(k[:nb, 3]))
    h, p = _chain_blocks(spec, left, right, pl, pr)
    return QuadraticHamiltonian(h, p)


def build_regime_b(spec: LatticeSpec, couplings: CouplingProfile, kappas=None, include_residual_stokes: bool = False):
    """SSH Hamiltonian from alternating effective couplings.

    Hopping is ``-G_n`` on intra-cell and ``G_{n+1}`` on inter-cell bonds. The
    optional residual pairing uses ``kappas`` rows ``(2 l_n, l_{n+1} + l_n)``.
    """
    gl, gr, _ = couplings.arrays(spec)
    nb = spec.num_right_bonds
    pl = pr = None
    if include_residual_stokes:
        if kappas is None:
            raise ValueError("residual Stokes terms need kappa arguments")
        k = _kappa_table(kappas, spec, 2, "B")
        pl = -gl * bessel_j(-2, k[:, 0])
        pr = gr * bessel_j(-2, np.nan_to_num(k[:nb, 1]))
    h, p = _chain_blocks(spec, -gl, gr, pl, pr)
    return QuadraticHamiltonian(h, p)


def build_regime_c_kitaev(spec: LatticeSpec, g_c: float, pairing_left: ArrayLike, pairing_right: ArrayLike):
    """Bosonic analog of the zero-chemical-potential Kitaev chain.

    Every bond hops with ``g_c``; pairing amplitudes enter as ``i * pairing``.
    """
    if g_c < 0:
        raise ValueError("g_c must be non-negative")
    nr, nb = spec.num_resonators, spec.num_right_bonds
    left = np.full(nr, float(g_c))
    right = np.full(nb, float(g_c))
    pl = 1j * _broadcast(pairing_left, nr, "pairing_left")
    pr = 1j * _broadcast(pairing_right, nb, "pairing_right")
    h, p = _chain_blocks(spec, left, right, pl, pr)
    return QuadraticHamiltonian(h, p)


def build_regime_d_nnn(spec: LatticeSpec, couplings: CouplingProfile, t_eff: ArrayLike):
    """SSH chain plus cavity-cavity hopping ``t_eff`` on the odd sublattice."""
    qh = build_regime_b(spec, couplings)
    t = _broadcast(t_eff, spec.num_cavities - 1, "t_eff")
    for n in range(spec.num_cavities - 1):
        _set_bond(qh.hopping, spec.cavity(n), spec.cavity(n + 1), t[n], True)
    return qh


def build_fermionic_kitaev_reference(length: int, t_hop: float, delta: float) -> np.ndarray:
    """Bogoliubov-de Gennes matrix of the open fermionic Kitaev chain at zero chemical potential.

    ``H = sum_j t (c_j^+ c_{j+1} + h.c.) + delta (c_j c_{j+1} + h.c.)`` written as
    ``[[h, D], [D^+, -h^T]]`` with ``D`` antisymmetric.
    """
    if length < 2:
        raise ValueError("Kitaev chain needs at least two sites")
    h = np.zeros((length, length))
    d = np.zeros((length, length))
    idx = np.arange(length - 1)
    h[idx, idx + 1] = h[idx + 1, idx] = t_hop
    d[idx, idx + 1] = delta
    d[idx + 1, idx] = -delta
    return np.block([[h, d], [d.T, -h.T]])


@dataclass
class _Term:
    kind: str  # "hop" (a_i^+ a_j) or "pair" (a_i^+ a_j^+)
    i: int
    j: int
    amp: float
    rate: float  # coefficient of t in the phase
    depth: float  # coefficient of sin(nu t + phi) in the phase


@dataclass
class TimeDependentGenerator:
    """Full rotating-frame generator of the modulated lattice.

    Calling the instance at time ``t`` returns the dynamical matrix
    ``D(t) = Sz M(t)``; :meth:`form` returns ``M(t)`` itself.
    """

    params: ModulationParams
    couplings: CouplingProfile
    spec: LatticeSpec
    terms: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.params.validate(self.spec)
        if not self.terms:
            self.terms = _generator_terms(self.params, self.couplings, self.spec)
        self._kind = np.array([t.kind == "pair" for t in self.terms], dtype=bool)
        self._i = np.array([t.i for t in self.terms], dtype=int)
        self._j = np.array([t.j for t in self.terms], dtype=int)
        self._amp = np.array([t.amp for t in self.terms], dtype=float)
        self._rate = np.array([t.rate for t in self.terms], dtype=float)
        self._depth = np.array([t.depth for t in self.terms], dtype=float)
        self._sz = np.concatenate([np.ones(self.dim), -np.ones(self.dim)])

    @property
    def dim(self) -> int:
        return self.spec.total_sites

    @property
    def period(self) -> float:
        return 2 * np.pi / self.params.nu

    def coefficients(self, times) -> np.ndarray:
        """Complex term amplitudes, shape ``(len(times), n_terms)``."""
        t = np.atleast_1d(np.asarray(times, dtype=float))[:, None]
        s = np.sin(self.params.nu * t + self.params.phi)
        return self._amp * np.exp(1j * (self._rate * t + self._depth * s))

    def form_batch(self, times) -> np.ndarray:
        """``M(t)`` for every time, shape ``(len(times), 2M, 2M)``."""
        c = self.coefficients(times)
        m = self.dim
        out = np.zeros((c.shape[0], 2 * m, 2 * m), dtype=complex)
        hop, pair = ~self._kind, self._kind
        i, j = self._i[hop], self._j[hop]
        ch = c[:, hop]
        out[:, i, j] += ch
        out[:, j, i] += ch.conj()
        out[:, m + i, m + j] += ch.conj()
        out[:, m + j, m + i] += ch
        i, j = self._i[pair], self._j[pair]
        cp = c[:, pair]
        out[:, i, m + j] += cp
        out[:, j, m + i] += cp
        out[:, m + i, j] += cp.conj()
        out[:, m + j, i] += cp.conj()
        return out

    def form(self, t: float) -> np.ndarray:
        return self.form_batch([t])[0]

    def batch(self, times) -> np.ndarray:
        """``D(t)`` for every time."""
        return self._sz[None, :, None] * self.form_batch(times)

    def __call__(self, t: float) -> np.ndarray:
        return self.batch([t])[0]

    def time_average(self, nodes: int = 10_000) -> np.ndarray:
        """Average of ``M(t)`` over one modulation period (periodic trapezoid rule)."""
        times = np.arange(nodes) * (self.period / nodes)
        return self.form_batch(times).mean(axis=0)


def _generator_terms(params: ModulationParams, couplings: CouplingProfile, spec: LatticeSpec) -> list:
    gl, gr, tc = couplings.arrays(spec)
    lam = np.asarray(params.lam, dtype=float)
    gam = np.asarray(params.gamma, dtype=float)
    wb = np.asarray(params.omega_b, dtype=float)
    da = np.asarray(params.delta_a, dtype=float)
    terms = []
    for n in range(spec.num_resonators):
        a, b = spec.cavity(n), spec.resonator(n)
        terms.append(_Term("hop", a, b, -gl[n], da[n] - wb[n], lam[n] - gam[n]))
        terms.append(_Term("pair", a, b, -gl[n], da[n] + wb[n], lam[n] + gam[n]))
        if n < spec.num_right_bonds:
            a2 = spec.cavity(n + 1)
            terms.append(_Term("hop", a2, b, gr[n], da[n + 1] - wb[n], lam[n + 1] - gam[n]))
            terms.append(_Term("pair", a2, b, gr[n], da[n + 1] + wb[n], lam[n + 1] + gam[n]))
    for n in range(spec.num_cavities - 1):
        if tc[n] != 0.0:
            terms.append(
                _Term("hop", spec.cavity(n + 1), spec.cavity(n), tc[n], da[n + 1] - da[n], lam[n + 1] - lam[n])
            )
    return [t for t in terms if t.amp != 0.0]


def time_generator(params: ModulationParams, couplings: CouplingProfile, spec: LatticeSpec) -> TimeDependentGenerator:
    """Build the time-dependent generator for a modulated lattice."""
    return TimeDependentGenerator(params, couplings, spec)
