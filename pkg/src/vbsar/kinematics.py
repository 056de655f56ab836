"""Orbital velocity and acceleration fields, and the interferometric velocity.

Deep-water linear wave kinematics: a surface Fourier component with
wavenumber k travels at angular frequency omega = sqrt(g k). Its surface
orbital velocity has horizontal amplitude omega*a along the propagation
direction and vertical amplitude omega*a, ninety degrees out of phase.
Projected on the radar line of sight (incidence theta from vertical,
look azimuth psi in the horizontal plane), each Fourier coefficient of
the surface picks up the complex weight

    omega * (cos(angle between k and look direction) * sin(theta) - i cos(theta))

on the positive member of each conjugate pair, and the conjugate weight
on the mirror cell, so the inverse FFT is real. Odd time derivatives
flip sign between the members of a pair, which is what the half-plane
sign grid from `spectra` encodes.

The interferometric velocity is the closed-form estimate that scales the
per-cell phase of a complex image by -wavelength*V/(4 pi B).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectra import half_plane_signs, wavenumber_axes


@dataclass(frozen=True)
class LookGeometry:
    """Radar line of sight and gravity for the dispersion relation."""

    incidence: float  # rad, from vertical, in (0, pi/2)
    look_azimuth: float  # rad, horizontal direction of the line of sight
    gravity: float = 9.81

    def __post_init__(self):
        if not 0.0 < self.incidence < np.pi / 2:
            raise ValueError(f"incidence must lie in (0, pi/2), got {self.incidence}")
        if not self.gravity > 0:
            raise ValueError(f"gravity must be positive, got {self.gravity}")


def angular_frequency(k, gravity: float):
    """Deep-water dispersion omega = sqrt(g k)."""
    return np.sqrt(gravity * np.asarray(k, dtype=float))


def _weight_grids(n: int, domain: float, geom: LookGeometry):
    """Velocity and acceleration FFT weights for the radial projection."""
    kx, ky = wavenumber_axes(n, domain)
    kxg, kyg = np.meshgrid(kx, ky, indexing="ij")
    kmag = np.hypot(kxg, kyg)
    signs = half_plane_signs(n)
    omega = angular_frequency(kmag, geom.gravity)
    safe = np.where(kmag > 0, kmag, 1.0)
    along_look = (kxg * np.cos(geom.look_azimuth) + kyg * np.sin(geom.look_azimuth)) / safe
    projection = along_look * np.sin(geom.incidence) - 1j * np.cos(geom.incidence)
    velocity_w = omega * signs * projection
    accel_w = -1j * omega**2 * projection * (signs != 0)
    return velocity_w, accel_w, omega, signs


def radial_velocity_field(
    zhat: np.ndarray, domain: float, geom: LookGeometry, t: float = 0.0
) -> np.ndarray:
    """Line-of-sight orbital velocity of the surface realization at time t."""
    n = zhat.shape[0]
    velocity_w, _aw, omega, signs = _weight_grids(n, domain, geom)
    evolution = np.exp(-1j * omega * signs * t) if t != 0.0 else 1.0
    return np.fft.ifft2(velocity_w * evolution * zhat).real.copy()


def orbital_fields(
    zhat: np.ndarray, domain: float, geom: LookGeometry
) -> tuple[np.ndarray, np.ndarray]:
    """Radial velocity and its analytic time derivative at t = 0."""
    n = zhat.shape[0]
    velocity_w, accel_w, _omega, _signs = _weight_grids(n, domain, geom)
    u_r = np.fft.ifft2(velocity_w * zhat).real.copy()
    a_r = np.fft.ifft2(accel_w * zhat).real.copy()
    return u_r, a_r


def interferometric_phase(image: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Principal-value argument per cell, with a mask flagging zero cells.

    The phase of a zero sample is defined as 0 so the operation is total;
    the accompanying boolean mask marks where that convention fired.
    """
    image = np.asarray(image)
    zero_mask = image == 0
    return np.angle(image), zero_mask


def interferometric_velocity(phase, velocity: float, baseline: float, wavelength: float):
    """Closed-form velocity from interferometric phase.

    u = -(wavelength / 4 pi) * (V / B) * phase. Exact for a pure phase
    signal; resolution smoothing and azimuth displacement in a real image
    turn it into an approximation.
    """
    return -(wavelength * velocity / (4.0 * np.pi * baseline)) * np.asarray(phase)
