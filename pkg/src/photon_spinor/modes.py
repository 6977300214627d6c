"""Momentum-space photon states as weighted lists of plane-wave helicity modes.

A mode stores helicity amplitudes (a_plus, a_minus) rather than raw spinor
components, so the constraint pair

    w x f_l = -f_u,   w x f_u = f_l,   w . f_u = w . f_l = 0

is satisfied by construction: f_u = a+ e+ + a- e-, f_l = -i (a+ e+ - a- e-),
with e+- the helicity eigenvectors of Sigma . w.

Transverse basis convention (fixes phases once and for all): with z = (0,0,1),
u = normalize(z x w) when |w_z| < 1 - 1e-6, otherwise u is x = (1,0,0)
orthogonalized against w; then v = w x u and e+- = (u +- i v)/sqrt(2).  This
makes e+(z) = (1, i, 0)/sqrt(2) exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ZeroWavevector

_POLAR_CAP = 1.0 - 1e-6
_NORM_TOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class WaveVector:
    kx: float
    ky: float
    kz: float

    def __post_init__(self):
        if self.kx == 0.0 and self.ky == 0.0 and self.kz == 0.0:
            raise ZeroWavevector("no photon can have vanishing energy or momentum")

    @property
    def array(self) -> np.ndarray:
        return np.array([self.kx, self.ky, self.kz])

    @property
    def k(self) -> float:
        return float(np.linalg.norm(self.array))

    @property
    def w(self) -> np.ndarray:
        return self.array / self.k


def _as_wavevector(k) -> WaveVector:
    if isinstance(k, WaveVector):
        return k
    a = np.asarray(k, dtype=float)
    return WaveVector(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True)
class HelicityBasis:
    e_plus: np.ndarray
    e_minus: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "e_plus", _readonly(np.asarray(self.e_plus, complex)))
        object.__setattr__(self, "e_minus", _readonly(np.asarray(self.e_minus, complex)))
        object.__setattr__(self, "w", _readonly(np.asarray(self.w, float)))


def transverse_frame(w: np.ndarray) -> tuple:
    """Real orthonormal pair (u, v) with v = w x u, per the fixed tie-break."""
    if abs(w[2]) < _POLAR_CAP:
        u = np.array([-w[1], w[0], 0.0])
        u /= np.linalg.norm(u)
    else:
        u = np.array([1.0, 0.0, 0.0]) - w[0] * w
        u /= np.linalg.norm(u)
    return u, np.cross(w, u)


def helicity_basis(k) -> HelicityBasis:
    """Helicity eigenvectors e+- of Sigma . w for the direction of k."""
    kv = _as_wavevector(k)
    w = kv.w
    u, v = transverse_frame(w)
    return HelicityBasis(e_plus=(u + 1j * v) / np.sqrt(2.0),
                         e_minus=(u - 1j * v) / np.sqrt(2.0),
                         w=w)


@dataclass(frozen=True)
class PlaneWaveMode:
    k: WaveVector
    a_plus: complex
    a_minus: complex
    weight: float = 1.0

    def __post_init__(self):
        if not self.weight > 0.0:
            raise ValueError(f"quadrature weight must be positive, got {self.weight}")

    @property
    def f_upper(self) -> np.ndarray:
        b = helicity_basis(self.k)
        return self.a_plus * b.e_plus + self.a_minus * b.e_minus

    @property
    def f_lower(self) -> np.ndarray:
        b = helicity_basis(self.k)
        return -1j * (self.a_plus * b.e_plus - self.a_minus * b.e_minus)

    @property
    def norm2(self) -> float:
        """psi+ psi of the induced spinor = |a+|^2 + |a-|^2."""
        return abs(self.a_plus) ** 2 + abs(self.a_minus) ** 2


def make_mode(k, a_plus, a_minus, weight: float = 1.0) -> PlaneWaveMode:
    return PlaneWaveMode(k=_as_wavevector(k), a_plus=complex(a_plus),
                         a_minus=complex(a_minus), weight=float(weight))


def spinor_of(mode: PlaneWaveMode) -> np.ndarray:
    """psi = (f_u; f_l)/sqrt(2); an eigenvector of H(k) with eigenvalue hbar c k."""
    return np.concatenate([mode.f_upper, mode.f_lower]) / np.sqrt(2.0)


def energy_eigenbasis(k) -> dict:
    """Orthonormal eigenvectors of H(k) grouped by sign of the eigenvalue.

    Returns {"positive": (2, 6), "zero": (2, 6), "negative": (2, 6)} with
    eigenvalues +hbar c k, 0, -hbar c k respectively.  Built analytically from
    the helicity basis, so it is deterministic.  Negative/zero rows are
    exposed read-only; ModeState carries positive-energy modes only.
    """
    b = helicity_basis(k)
    s2 = np.sqrt(2.0)
    pos = np.stack([np.concatenate([b.e_plus, -1j * b.e_plus]) / s2,
                    np.concatenate([b.e_minus, 1j * b.e_minus]) / s2])
    neg = np.stack([np.concatenate([b.e_plus, 1j * b.e_plus]) / s2,
                    np.concatenate([b.e_minus, -1j * b.e_minus]) / s2])
    wc = b.w.astype(complex)
    zero = np.stack([np.concatenate([wc, np.zeros(3)]),
                     np.concatenate([np.zeros(3), wc])])
    return {"positive": _readonly(pos), "zero": _readonly(zero), "negative": _readonly(neg)}


def positive_energy_project(raw, k) -> np.ndarray:
    """Project a raw 6-vector onto the positive-energy eigenspace of H(k).

    The projection is Hermitian and idempotent; helicity-mode spinors pass
    through unchanged and longitudinal content is annihilated.
    """
    raw = np.asarray(raw, dtype=complex)
    pos = energy_eigenbasis(k)["positive"]
    return (pos.conj() @ raw) @ pos


@dataclass(frozen=True)
class ModeState:
    modes: tuple = field(default_factory=tuple)
    time: float = 0.0

    @property
    def is_normalized(self) -> bool:
        return abs(total_norm(self) - 1.0) <= _NORM_TOL


def make_state(modes, time: float = 0.0) -> ModeState:
    return ModeState(modes=tuple(modes), time=float(time))


def total_norm(state: ModeState) -> float:
    """Sum of weight * psi+ psi over the mode list (the discrete d^3k sum)."""
    return float(sum(m.weight * m.norm2 for m in state.modes))


def normalize(state: ModeState) -> ModeState:
    n = total_norm(state)
    if n == 0.0:
        raise ValueError("cannot normalize an empty or zero state")
    s = 1.0 / np.sqrt(n)
    return replace(state, modes=tuple(
        replace(m, a_plus=m.a_plus * s, a_minus=m.a_minus * s) for m in state.modes))


def evolve(state: ModeState, dt: float, c: float = 1.0) -> ModeState:
    """Advance each mode by exp(-i omega dt), omega = c k; weights unchanged."""
    out = []
    for m in state.modes:
        phase = np.exp(-1j * c * m.k.k * dt)
        out.append(replace(m, a_plus=m.a_plus * phase, a_minus=m.a_minus * phase))
    return ModeState(modes=tuple(out), time=state.time + dt)


def constraint_residual(state: ModeState) -> dict:
    """Max constraint residuals over the mode list (0 for an empty state)."""
    res = {"w_dot_f_upper": 0.0, "w_dot_f_lower": 0.0,
           "cross_lower_plus_upper": 0.0, "cross_upper_minus_lower": 0.0}
    for m in state.modes:
        w, fu, fl = m.k.w, m.f_upper, m.f_lower
        res["w_dot_f_upper"] = max(res["w_dot_f_upper"], abs(np.dot(w, fu)))
        res["w_dot_f_lower"] = max(res["w_dot_f_lower"], abs(np.dot(w, fl)))
        res["cross_lower_plus_upper"] = max(
            res["cross_lower_plus_upper"], float(np.max(np.abs(np.cross(w, fl) + fu))))
        res["cross_upper_minus_lower"] = max(
            res["cross_upper_minus_lower"], float(np.max(np.abs(np.cross(w, fu) - fl))))
    return res


def random_state(rng: np.random.Generator, n_modes: int, k_min: float = 0.5,
                 k_max: float = 2.0, time: float = 0.0) -> ModeState:
    """Random positive-energy state: isotropic directions, complex amplitudes."""
    modes = []
    for _ in range(n_modes):
        w = rng.normal(size=3)
        w /= np.linalg.norm(w)
        k = w * rng.uniform(k_min, k_max)
        a_p = rng.normal() + 1j * rng.normal()
        a_m = rng.normal() + 1j * rng.normal()
        modes.append(make_mode(k, a_p, a_m, weight=1.0))
    return make_state(modes, time=time)


def state_to_json(state: ModeState) -> str:
    """Serialize to the wire format: a JSON array of mode records."""
    records = [
        {
            "k": [m.k.kx, m.k.ky, m.k.kz],
            "a_plus": [m.a_plus.real, m.a_plus.imag],
            "a_minus": [m.a_minus.real, m.a_minus.imag],
            "weight": m.weight,
        }
        for m in state.modes
    ]
    return json.dumps(records)


def state_from_json(text: str, time: float = 0.0) -> ModeState:
    records = json.loads(text)
    modes = [
        make_mode(r["k"], complex(*r["a_plus"]), complex(*r["a_minus"]), r["weight"])
        for r in records
    ]
    return make_state(modes, time=time)
