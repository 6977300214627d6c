"""Conserved quantities, spin/orbital expectation values, density variants.

Spin expectation values are reported in units of hbar and computed by three
independent routes that must agree on constraint-satisfying states:

  omega    sum w_i psi+ Omega psi                (constant 6x6 operator)
  reduced  sum w_i psi+ (Omega . w) w psi        (reduced spin operator)
  cross    -i sum w_i f_u* x f_u                 (upper-part cross product,
                                                  checked against the lower)

The position-space density variants Psi+ Omega Psi and Psi+ (1 +- Gamma0)
Omega Psi (and Psi+ Psi vs F_u+ F_u vs F_l+ F_l for probability) integrate to
the same totals while differing pointwise; the reported integrals and
pointwise spread together exhibit that no unique local density exists.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .algebra import OPERATORS, reduced_spin_along
from .errors import ConstraintViolated, GridTooCoarse
from .fields import (PositionField, SpectralField, csum, csum_complex, k_axis,
                     k_magnitude, k_vectors, rc_residual, to_momentum, unit_k,
                     x_axis, _fft_to_momentum, _fft_to_position)
from .modes import ModeState, spinor_of
from .units import NATURAL, Units

GRID_TOL = 1e-8
MODE_TOL = 1e-12

_OMEGA = np.stack([m.entries for m in OPERATORS.omega])


def total_probability(state) -> float:
    """Total probability: weighted mode sum or grid quadrature of the norm."""
    if isinstance(state, ModeState):
        return float(sum(m.weight * m.norm2 for m in state.modes))
    if isinstance(state, SpectralField):
        return csum(np.abs(state.psi) ** 2) * state.grid.dk ** 3
    if isinstance(state, PositionField):
        return csum(np.abs(state.Psi) ** 2) * state.grid.dx ** 3
    raise TypeError(f"unsupported state type {type(state).__name__}")


def energy(state, units: Units = NATURAL) -> float:
    """Total energy hbar c sum k |psi|^2; zero for an empty (degenerate) state."""
    hc = units.hbar * units.c
    if isinstance(state, ModeState):
        return hc * float(sum(m.weight * m.k.k * m.norm2 for m in state.modes))
    if isinstance(state, SpectralField):
        dens = k_magnitude(state.grid) * np.sum(np.abs(state.psi) ** 2, axis=-1)
        return hc * csum(dens) * state.grid.dk ** 3
    raise TypeError(f"unsupported state type {type(state).__name__}")


def _spin_mode_state(state: ModeState, method: str) -> np.ndarray:
    total = np.zeros(3)
    for m in state.modes:
        psi = spinor_of(m)
        if method == "omega":
            val = np.real(np.einsum("i,aij,j->a", psi.conj(), _OMEGA, psi))
        elif method == "reduced":
            mats = reduced_spin_along(OPERATORS, m.k.w)
            val = np.array([np.real(psi.conj() @ s.entries @ psi) for s in mats])
        else:
            fu, fl = m.f_upper, m.f_lower
            vu = np.real(-1j * np.cross(fu.conj(), fu))
            vl = np.real(-1j * np.cross(fl.conj(), fl))
            if np.max(np.abs(vu - vl)) > MODE_TOL * max(1.0, m.norm2):
                raise ConstraintViolated(
                    "upper and lower cross-product forms disagree; "
                    "state does not satisfy the constraint")
            val = vu
        total += m.weight * val
    return total


def _spin_spectral(field: SpectralField, method: str) -> np.ndarray:
    w = unit_k(field.grid)
    fu, fl = field.f_upper, field.f_lower
    dv = field.grid.dk ** 3
    if method == "omega":
        dens = np.real(np.einsum("...i,aij,...j->...a", field.psi.conj(),
                                 _OMEGA, field.psi))
    elif method == "reduced":
        # psi+ (Omega . w) psi = Im(f* . (w x f)) averaged over the two parts
        su = np.real(1j * np.einsum("...i,...i->...", fu.conj(), np.cross(w, fu)))
        sl = np.real(1j * np.einsum("...i,...i->...", fl.conj(), np.cross(w, fl)))
        dens = 0.5 * (su + sl)[..., None] * w
    else:
        vu = np.real(-1j * np.cross(fu.conj(), fu))
        vl = np.real(-1j * np.cross(fl.conj(), fl))
        diff = np.array([csum(vu[..., i]) - csum(vl[..., i]) for i in range(3)]) * dv
        scale = max(total_probability(field), 1e-300)
        if np.max(np.abs(diff)) > GRID_TOL * scale:
            raise ConstraintViolated(
                "upper and lower cross-product spin integrals disagree")
        dens = vu
    return np.array([csum(dens[..., i]) for i in range(3)]) * dv


def spin_expectation(state, method: str = "omega") -> np.ndarray:
    """Spin expectation (units hbar) by one of the three routes.

    For a normalized state this is the expectation value; otherwise it is the
    unnormalized integral.
    """
    if method not in ("omega", "reduced", "cross"):
        raise ValueError(f"unknown spin method {method!r}")
    if isinstance(state, ModeState):
        return _spin_mode_state(state, method)
    if isinstance(state, SpectralField):
        return _spin_spectral(state, method)
    raise TypeError(f"unsupported state type {type(state).__name__}")


# ---------------------------------------------------------------------------
# orbital angular momentum
# ---------------------------------------------------------------------------

def _grad_k_spectral(field: SpectralField, comp: np.ndarray) -> list:
    """d/dk of the trigonometric interpolant via multiplication by -i x."""
    grid = field.grid
    pos = _fft_to_position(grid, comp)
    xa = x_axis(grid)
    shapes = [(-1, 1, 1, 1), (1, -1, 1, 1), (1, 1, -1, 1)]
    return [_fft_to_momentum(grid, -1j * xa.reshape(s) * pos) for s in shapes]


def _grad_k_central(field: SpectralField, comp: np.ndarray) -> list:
    """Central differences on the monotone (fftshifted) k axes; one-sided at
    the band edge rather than wrapping across the Nyquist jump."""
    grid = field.grid
    shifted = sfft.fftshift(comp, axes=(0, 1, 2))
    ks = sfft.fftshift(k_axis(grid))
    grads = np.gradient(shifted, ks, ks, ks, axis=(0, 1, 2))
    return [sfft.ifftshift(g, axes=(0, 1, 2)) for g in grads]


def _orbital_integral(field: SpectralField, comp: np.ndarray, method: str) -> np.ndarray:
    g = (_grad_k_spectral if method == "spectral" else _grad_k_central)(field, comp)
    kv = k_vectors(field.grid)
    kx, ky, kz = kv[..., 0, None], kv[..., 1, None], kv[..., 2, None]
    cc = comp.conj()
    lx = csum_complex(cc * (ky * g[2] - kz * g[1]))
    ly = csum_complex(cc * (kz * g[0] - kx * g[2]))
    lz = csum_complex(cc * (kx * g[1] - ky * g[0]))
    return np.real(-1j * np.array([lx, ly, lz])) * field.grid.dk ** 3


def orbital_am_expectation(field: SpectralField, method: str = "spectral",
                           rtol: float = GRID_TOL) -> np.ndarray:
    """Orbital angular momentum -i sum f+ (k x grad_k) f dk^3 (units hbar).

    Evaluated separately from the upper and lower spinor parts; the mean is
    returned.  The two must agree within rtol relative to the total
    probability; disagreement beyond 10x rtol raises GridTooCoarse, which
    signals k-space structure the grid cannot resolve.

    method = "spectral" (default) differentiates the trigonometric interpolant
    exactly, so well-resolved band-limited packets agree to rounding;
    method = "central" uses second-order central differences.
    """
    if method not in ("spectral", "central"):
        raise ValueError(f"unknown derivative method {method!r}")
    lu = _orbital_integral(field, field.f_upper, method)
    ll = _orbital_integral(field, field.f_lower, method)
    scale = max(total_probability(field), 1e-300)
    disagree = float(np.max(np.abs(lu - ll))) / scale
    if disagree > 10.0 * rtol:
        raise GridTooCoarse(
            f"upper/lower orbital integrals disagree by {disagree:.3e} "
            f"(relative), beyond 10 x rtol = {10 * rtol:.1e}")
    return 0.5 * (lu + ll)


def orbital_am_position(field: PositionField) -> np.ndarray:
    """Position form -i sum F+ (x x grad) F dx^3, gradient applied spectrally.

    Cross-check companion of orbital_am_expectation; the mean of the upper and
    lower contributions is returned.
    """
    grid = field.grid
    spec = to_momentum(field)
    kv = k_vectors(grid)
    xa = x_axis(grid)
    shapes = [(-1, 1, 1, 1), (1, -1, 1, 1), (1, 1, -1, 1)]
    out = []
    for comp_k, comp_x in ((spec.f_upper, field.F_upper), (spec.f_lower, field.F_lower)):
        grad = [_fft_to_position(grid, 1j * kv[..., i, None] * comp_k) for i in range(3)]
        x1, x2, x3 = (xa.reshape(s) for s in shapes)
        cc = comp_x.conj()
        lx = csum_complex(cc * (x2 * grad[2] - x3 * grad[1]))
        ly = csum_complex(cc * (x3 * grad[0] - x1 * grad[2]))
        lz = csum_complex(cc * (x1 * grad[1] - x2 * grad[0]))
        out.append(np.real(-1j * np.array([lx, ly, lz])) * grid.dx ** 3)
    return 0.5 * (out[0] + out[1])


# ---------------------------------------------------------------------------
# density variants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DensityVariants:
    """Pointwise density variants sharing one integral.

    For kind = "spin" the densities are 3-vector fields (plain, 1 + Gamma0 and
    1 - Gamma0 weightings of Omega); for kind = "probability" they are the
    scalars Psi+ Psi, F_u+ F_u and F_l+ F_l.  integrals maps variant name to
    its total; max_pointwise_spread is the largest pointwise difference
    between any two variants, and peak_density the largest pointwise value of
    the plain density, so spread_fraction > 0 together with agreeing integrals
    is the nonlocality statement.
    """

    kind: str
    grid: object
    d_plain: np.ndarray
    d_plus: np.ndarray
    d_minus: np.ndarray
    integrals: dict
    max_pointwise_spread: float
    peak_density: float

    @property
    def spread_fraction(self) -> float:
        return self.max_pointwise_spread / self.peak_density if self.peak_density else 0.0

    @property
    def max_integral_disagreement(self) -> float:
        vals = [np.atleast_1d(np.asarray(v, float)) for v in self.integrals.values()]
        d = 0.0
        for i in range(len(vals)):
            for j in range(i + 1, len(vals)):
                d = max(d, float(np.max(np.abs(vals[i] - vals[j]))))
        return d

    def as_dict(self) -> dict:
        ints = {k: (list(np.atleast_1d(v)) if np.ndim(v) else float(v))
                for k, v in self.integrals.items()}
        return {
            "kind": self.kind,
            "integrals": ints,
            "max_integral_disagreement": self.max_integral_disagreement,
            "max_pointwise_spread": self.max_pointwise_spread,
            "peak_density": self.peak_density,
            "spread_fraction": self.spread_fraction,
        }


def _require_rc(field: PositionField, rc_tol: float) -> None:
    res = rc_residual(to_momentum(field))
    if res > rc_tol:
        raise ConstraintViolated(
            f"constraint residual {res:.3e} exceeds {rc_tol:.1e}")


def spin_density_variants(field: PositionField, rc_tol: float = 1e-6) -> DensityVariants:
    """The three spin density candidates and their (equal) totals."""
    _require_rc(field, rc_tol)
    fu, fl = field.F_upper, field.F_lower
    d_plus = np.real(-1j * np.cross(fu.conj(), fu))
    d_minus = np.real(-1j * np.cross(fl.conj(), fl))
    d_plain = 0.5 * (d_plus + d_minus)
    dv = field.grid.dx ** 3
    ints = {name: np.array([csum(d[..., i]) for i in range(3)]) * dv
            for name, d in (("plain", d_plain), ("plus", d_plus), ("minus", d_minus))}
    diffs = [np.linalg.norm(d_plain - d_plus, axis=-1),
             np.linalg.norm(d_plain - d_minus, axis=-1),
             np.linalg.norm(d_plus - d_minus, axis=-1)]
    spread = float(max(np.max(d) for d in diffs))
    peak = float(np.max(np.linalg.norm(d_plain, axis=-1)))
    return DensityVariants(kind="spin", grid=field.grid, d_plain=d_plain,
                           d_plus=d_plus, d_minus=d_minus, integrals=ints,
                           max_pointwise_spread=spread, peak_density=peak)


def probability_density_variants(field: PositionField,
                                 rc_tol: float = 1e-6) -> DensityVariants:
    """Psi+ Psi versus the upper/lower-part probability densities."""
    _require_rc(field, rc_tol)
    d_plain = np.sum(np.abs(field.Psi) ** 2, axis=-1)
    d_plus = np.sum(np.abs(field.F_upper) ** 2, axis=-1)
    d_minus = np.sum(np.abs(field.F_lower) ** 2, axis=-1)
    dv = field.grid.dx ** 3
    ints = {name: csum(d) * dv
            for name, d in (("plain", d_plain), ("plus", d_plus), ("minus", d_minus))}
    spread = float(max(np.max(np.abs(d_plain - d_plus)),
                       np.max(np.abs(d_plain - d_minus)),
                       np.max(np.abs(d_plus - d_minus))))
    peak = float(np.max(d_plain))
    return DensityVariants(kind="probability", grid=field.grid, d_plain=d_plain,
                           d_plus=d_plus, d_minus=d_minus, integrals=ints,
                           max_pointwise_spread=spread, peak_density=peak)


def export_density_csv(variants: DensityVariants, path) -> None:
    """Dump the density variants as CSV rows x,y,z,plain...,plus...,minus..."""
    grid = variants.grid
    xa = x_axis(grid)
    xs, ys, zs = np.meshgrid(xa, xa, xa, indexing="ij")
    vec = variants.d_plain.ndim == 4
    cols = (["plain_x", "plain_y", "plain_z", "plus_x", "plus_y", "plus_z",
             "minus_x", "minus_y", "minus_z"] if vec else ["plain", "plus", "minus"])
    stacked = (np.concatenate([variants.d_plain, variants.d_plus, variants.d_minus],
                              axis=-1) if vec else
               np.stack([variants.d_plain, variants.d_plus, variants.d_minus], axis=-1))
    with open(path, "w") as fh:
        fh.write("x,y,z," + ",".join(cols) + "\n")
        flat = stacked.reshape(-1, stacked.shape[-1])
        pts = np.stack([xs.ravel(), ys.ravel(), zs.ravel()], axis=1)
        for p, row in zip(pts, flat):
            fh.write(",".join(f"{v:.17g}" for v in (*p, *row)) + "\n")


# ---------------------------------------------------------------------------
# summary report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ObservableReport:
    total_probability: float
    energy: float
    spin_omega: np.ndarray
    spin_reduced: np.ndarray
    spin_cross: np.ndarray
    pairwise_discrepancies: dict
    normalized: bool
    orbital: np.ndarray | None = None

    def as_dict(self) -> dict:
        d = {
            "total_probability": self.total_probability,
            "energy": self.energy,
            "spin_omega": list(self.spin_omega),
            "spin_reduced": list(self.spin_reduced),
            "spin_cross": list(self.spin_cross),
            "pairwise_discrepancies": dict(self.pairwise_discrepancies),
            "normalized": self.normalized,
        }
        if self.orbital is not None:
            d["orbital"] = list(self.orbital)
        return d


def observable_report(state, units: Units = NATURAL,
                      include_orbital: bool = False) -> ObservableReport:
    """Evaluate every observable of a state and the spin-route discrepancies."""
    p = total_probability(state)
    s_o = spin_expectation(state, "omega")
    s_r = spin_expectation(state, "reduced")
    s_c = spin_expectation(state, "cross")
    disc = {
        "omega_vs_reduced": float(np.max(np.abs(s_o - s_r))),
        "omega_vs_cross": float(np.max(np.abs(s_o - s_c))),
        "reduced_vs_cross": float(np.max(np.abs(s_r - s_c))),
    }
    orb = None
    if include_orbital:
        if isinstance(state, ModeState):
            raise TypeError("orbital angular momentum requires a gridded "
                            "spectral field; mode lists carry no neighborhood")
        orb = orbital_am_expectation(state)
    return ObservableReport(
        total_probability=p,
        energy=energy(state, units),
        spin_omega=s_o, spin_reduced=s_r, spin_cross=s_c,
        pairwise_discrepancies=disc,
        normalized=abs(p - 1.0) <= MODE_TOL,
        orbital=orb,
    )
