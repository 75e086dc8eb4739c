"""Dielectric response of the body and plane-wave optics of a finite slab.

Everything is SI: angular frequencies in rad/s, lengths in m. Complex
square roots are taken on the branch with Im >= 0, so evanescent fields
decay away from the interface that binds them.

The slab is vacuum / medium / vacuum with thickness ``delta``; the single
interface is described by the amplitude Fresnel coefficients (r, t, tbar)
with the exact identity t*tbar = 1 - r**2, which is all the slab formulas
consume.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.constants import c


class LosslessResonanceError(ArithmeticError):
    """Undamped oscillator evaluated exactly at its resonance frequency."""


class DegenerateModeError(ArithmeticError):
    """Vanishing Fresnel denominator (grazing or surface-mode degenerate)."""


class SlabResonanceError(ArithmeticError):
    """Guided-mode resonance of a lossless slab (vanishing denominator)."""


class Polarization(Enum):
    TE = "TE"
    TM = "TM"


@dataclass(frozen=True)
class DielectricModel:
    """Single-oscillator Drude-Lorentz permittivity.

    eps(omega) = eps_inf * (omega_L**2 - omega**2 - i*gamma_damp*omega)
                         / (omega_T**2 - omega**2 - i*gamma_damp*omega)

    Parameters
    ----------
    eps_inf : float
        High-frequency permittivity, >= 1.
    omega_L : float
        Longitudinal optical frequency [rad/s].
    omega_T : float
        Transverse (resonance) frequency [rad/s], 0 < omega_T < omega_L.
    gamma_damp : float
        Phenomenological damping rate [rad/s], >= 0.
    """

    eps_inf: float
    omega_L: float
    omega_T: float
    gamma_damp: float

    def __post_init__(self):
        if not self.eps_inf >= 1.0:
            raise ValueError("eps_inf must be >= 1")
        # omega_L == omega_T is the zero-strength oscillator: a
        # dispersionless medium with eps identically eps_inf (vacuum for
        # eps_inf = 1), used by the empty-slab checks
        if not (self.omega_L >= self.omega_T > 0.0):
            raise ValueError("need omega_L >= omega_T > 0")
        if not self.gamma_damp >= 0.0:
            raise ValueError("gamma_damp must be >= 0")

    @property
    def dispersionless(self) -> bool:
        return self.omega_L == self.omega_T


def permittivity(model: DielectricModel, omega):
    """Drude-Lorentz permittivity at angular frequency omega > 0.

    Passivity (Im eps >= 0 for omega > 0) is guaranteed by the parameter
    constraints. A lossless model evaluated exactly at omega_T has a pole
    and raises LosslessResonanceError.
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0.0):
        raise ValueError("permittivity requires omega > 0")
    if model.dispersionless:
        eps = np.full(omega.shape, complex(model.eps_inf))
        return complex(model.eps_inf) if omega.ndim == 0 else eps
    num = model.omega_L**2 - omega**2 - 1j * model.gamma_damp * omega
    den = model.omega_T**2 - omega**2 - 1j * model.gamma_damp * omega
    if np.any(den == 0):
        raise LosslessResonanceError("lossless resonance singularity")
    eps = model.eps_inf * num / den
    return complex(eps) if eps.ndim == 0 else eps


def surface_mode_frequency(model: DielectricModel, tol: float = 1e-12) -> float:
    """Frequency where Re eps(omega) = -1 (surface phonon-polariton).

    Bisection on (omega_T, omega_L); Re eps runs from large negative just
    above the resonance up through -1 towards 0 at omega_L.
    """
    hi = model.omega_L

    def g(w):
        return permittivity(model, w).real + 1.0

    # damping smooths the resonance: walk up from omega_T until the
    # negative-permittivity band is reached
    lo = None
    for x in np.geomspace(1e-9, 0.5, 60):
        w = model.omega_T * (1.0 + x)
        if w < hi and g(w) < 0.0:
            lo = w
            break
    if lo is None or g(hi) < 0.0:
        raise ValueError("no surface mode: Re eps = -1 not bracketed")
    glo = g(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0.0 or (hi - lo) < tol * mid:
            return float(mid)
        if glo * gm < 0.0:
            hi = mid
        else:
            lo, glo = mid, gm
    return float(0.5 * (lo + hi))


def sqrt_im_nonneg(w):
    """Principal square root flipped onto the Im >= 0 branch."""
    s = np.sqrt(np.asarray(w, dtype=complex))
    return np.where(s.imag < 0.0, -s, s)


def vacuum_kz(omega, k):
    """z-wavevector in vacuum: sqrt(omega^2/c^2 - k^2), Im >= 0 branch."""
    return sqrt_im_nonneg((omega / c) ** 2 - np.asarray(k, dtype=float) ** 2)


def medium_kz(omega, k, eps):
    """z-wavevector inside the medium: sqrt(eps*omega^2/c^2 - k^2), Im >= 0."""
    return sqrt_im_nonneg(eps * (omega / c) ** 2 - np.asarray(k, dtype=float) ** 2)


@dataclass(frozen=True)
class PlaneWaveMode:
    """One field mode: polarization, transverse wavevector magnitude, frequency."""

    polarization: Polarization
    k: float
    omega: float

    def __post_init__(self):
        if not self.k >= 0.0:
            raise ValueError("k must be >= 0")
        if not self.omega > 0.0:
            raise ValueError("omega must be > 0")

    @property
    def kz(self) -> complex:
        """Vacuum z-wavevector; real >= 0 if ck < omega, +i|kz| otherwise."""
        return complex(vacuum_kz(self.omega, self.k))

    def kzm(self, eps) -> complex:
        """z-wavevector inside a medium of permittivity eps (Im >= 0)."""
        return complex(medium_kz(self.omega, self.k, eps))


@dataclass(frozen=True)
class SlabCoefficients:
    """Reflection and transmission amplitudes of the finite slab, per mode."""

    rho: complex
    tau: complex


def fresnel(mode: PlaneWaveMode, eps):
    """Amplitude Fresnel coefficients (r, t, tbar) of the vacuum/medium interface.

    r is the reflection amplitude on the vacuum side; t and tbar are the
    forward (vacuum -> medium) and reverse transmission amplitudes. The
    normalization satisfies t*tbar = 1 - r**2 exactly, which is the only
    combination the slab formulas use.
    """
    kz = mode.kz
    kzm = mode.kzm(eps)
    if mode.polarization is Polarization.TE:
        den = kz + kzm
        if abs(den) <= 1e-12 * (abs(kz) + abs(kzm)) or den == 0:
            raise DegenerateModeError("grazing degenerate mode")
        r = (kz - kzm) / den
        t = 2.0 * kz / den
        tbar = 2.0 * kzm / den
    else:
        den = eps * kz + kzm
        if abs(den) <= 1e-12 * (abs(eps * kz) + abs(kzm)) or den == 0:
            raise DegenerateModeError("grazing degenerate mode")
        n = complex(sqrt_im_nonneg(eps))
        r = (eps * kz - kzm) / den
        t = 2.0 * n * kz / den
        tbar = 2.0 * n * kzm / den
    return r, t, tbar


def slab_coefficients(mode: PlaneWaveMode, model: DielectricModel, delta: float) -> SlabCoefficients:
    """Reflection/transmission of a slab of thickness delta >= 0 in vacuum.

    rho = r (1 - e) / (1 - r^2 e),  tau = t tbar e^{i(kzm - kz) delta} / (1 - r^2 e),
    with e = exp(2 i kzm delta). The Im kzm >= 0 branch makes |e| <= 1,
    so nothing overflows for any thickness.
    """
    if delta < 0.0:
        raise ValueError("delta must be >= 0")
    eps = permittivity(model, mode.omega)
    r, t, tbar = fresnel(mode, eps)
    kz = mode.kz
    kzm = mode.kzm(eps)
    e2 = np.exp(2j * kzm * delta)
    den = 1.0 - r * r * e2
    if abs(den) < 1e-13:
        raise SlabResonanceError("slab resonance")
    rho = r * (1.0 - e2) / den
    tau = t * tbar * np.exp(1j * (kzm - kz) * delta) / den
    return SlabCoefficients(rho=complex(rho), tau=complex(tau))


def slab_amplitudes(pol: Polarization, omega: float, k, kz, eps, delta: float,
                    want_tau: bool = True):
    """Vectorized slab (rho, tau) over arrays of transverse wavenumbers.

    ``kz`` is supplied by the caller (real for propagative modes, i*kappa
    for evanescent ones) so integration substitutions stay cancellation-free.
    k_zm comes from (eps - 1) omega^2/c^2 + kz^2, the cancellation-free
    form of eps omega^2/c^2 - k^2 near the light line. Uses
    t*tbar = 1 - r**2 directly. For evanescent incidence tau grows like
    exp((kappa - Im k_zm) delta) and is skipped with want_tau=False.
    """
    k = np.asarray(k, dtype=float)
    kz = np.asarray(kz)
    kzm = sqrt_im_nonneg((eps - 1.0) * (omega / c) ** 2 + kz * kz)
    if pol is Polarization.TE:
        r = (kz - kzm) / (kz + kzm)
    else:
        r = (eps * kz - kzm) / (eps * kz + kzm)
    e2 = np.exp(2j * kzm * delta)
    den = 1.0 - r * r * e2
    if np.any(np.abs(den) < 1e-13):
        raise SlabResonanceError("slab resonance")
    rho = r * (1.0 - e2) / den
    if not want_tau:
        return rho, None
    tau = (1.0 - r * r) * np.exp(1j * (kzm - kz) * delta) / den
    return rho, tau


# --- material files -------------------------------------------------------

_MATERIAL_KEYS = ("eps_inf", "omega_L", "omega_T", "gamma_damp")


def load_material(source: str | Path) -> DielectricModel:
    """Load a Drude-Lorentz model from a flat key/value file.

    The format is one ``key = value`` pair per line (SI units), ``#``
    comments allowed. The name ``sic`` resolves to the bundled silicon
    carbide preset.
    """
    if isinstance(source, str) and re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", source):
        text = resources.files("neqatom").joinpath(f"materials/{source.lower()}.dat").read_text()
    else:
        text = Path(source).read_text()
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"material file line {lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _MATERIAL_KEYS:
            raise ValueError(f"unknown material key: {key!r}")
        if key in values:
            raise ValueError(f"duplicate material key: {key!r}")
        values[key] = float(val.strip())
    missing = [k for k in _MATERIAL_KEYS if k not in values]
    if missing:
        raise ValueError(f"missing material keys: {', '.join(missing)}")
    return DielectricModel(**values)
