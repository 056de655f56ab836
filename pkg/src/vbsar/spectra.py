"""Swell directional wave spectra and random sea-surface synthesis.

The sea surface is a zero-mean Gaussian random field. Its two-sided
directional wavenumber spectrum lives on the FFT grid of the scene;
every independent half-plane cell receives a circular complex Gaussian
amplitude whose variance integrates the spectral density over the cell,
and the mirror cell carries the complex conjugate so the inverse FFT is
purely real. The DC cell is zeroed (zero-mean surface) and the Nyquist
row and column of the even grid are zeroed as a band-limit guard: those
cells are their own mirror image under aliasing, which would break the
conjugate pairing needed later by the odd time-derivative weights of the
orbital-velocity fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

# sub-/super-peak relative widths of the peak-enhancement exponent
PEAK_WIDTH_BELOW = 0.07
PEAK_WIDTH_ABOVE = 0.09

# RNG substream indices: the surface draw and the image noise must never
# share a stream even when they share the master seed
SURFACE_STREAM = 0
NOISE_STREAM = 1


def omnidirectional_swell(k, alpha: float, peak_wavenumber: float, enhancement: float):
    """Omnidirectional swell spectrum S(k) in m^3.

    S(k) = alpha/(2 k^3) * exp(-5/4 (k_p/k)^2) * gamma^G with the
    peak-enhancement exponent G = exp(-(sqrt(k) - sqrt(k_p))^2 /
    (2 sigma^2 k_p)), sigma = 0.07 below the peak and 0.09 above it.
    The k = 0 limit is 0 (the exponential decay beats the k^-3 pole).
    """
    k = np.asarray(k, dtype=float)
    kp = peak_wavenumber
    out = np.zeros_like(k)
    pos = k > 0
    kk = k[pos]
    sigma = np.where(kk <= kp, PEAK_WIDTH_BELOW, PEAK_WIDTH_ABOVE)
    g_exp = np.exp(-((np.sqrt(kk) - np.sqrt(kp)) ** 2) / (2.0 * sigma**2 * kp))
    out[pos] = (
        alpha / (2.0 * kk**3) * np.exp(-1.25 * (kp / kk) ** 2) * enhancement**g_exp
    )
    return out


@lru_cache(maxsize=32)
def spreading_normalization(exponent: float) -> float:
    """Normalization N_p with integral of (N_p/2)|cos|^(2p) over (-pi, pi] = 1.

    Computed by adaptive quadrature; for p = 2 the exact value is 8/(3 pi).
    """
    total, _err = quad(lambda t: np.abs(np.cos(t)) ** (2.0 * exponent), -np.pi, np.pi)
    return 2.0 / total


def cosine_power_spreading(phi, wave_direction: float, exponent: float):
    """Directional spreading (N_p/2)|cos(phi - phi_w)|^(2p), unit integral."""
    phi = np.asarray(phi, dtype=float)
    np_norm = spreading_normalization(float(exponent))
    return 0.5 * np_norm * np.abs(np.cos(phi - wave_direction)) ** (2.0 * exponent)


@dataclass(frozen=True)
class SpectralGrid:
    """Two-sided directional spectrum sampled on the scene's FFT grid.

    ``density`` is the Cartesian spectral density S(k)*D(phi)/k in m^4,
    FFT-ordered on both axes (axis 0 = cross-track kx, axis 1 = azimuth
    ky). ``cell_area`` is dkx*dky.
    """

    n: int
    domain: float
    kx: np.ndarray
    ky: np.ndarray
    density: np.ndarray

    @property
    def cell_area(self) -> float:
        dk = 2.0 * np.pi / self.domain
        return dk * dk

    def variance(self) -> float:
        """Surface elevation variance implied by the discrete spectrum."""
        return float(np.sum(self.density) * self.cell_area)


def wavenumber_axes(n: int, domain: float) -> tuple[np.ndarray, np.ndarray]:
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=domain / n)
    return k, k.copy()


def directional_spectrum_grid(
    n: int,
    domain: float,
    alpha: float,
    peak_wavenumber: float,
    enhancement: float,
    spread_exponent: float,
    wave_direction: float,
) -> SpectralGrid:
    """Sample S(k)*D(phi)/k on the FFT grid; DC and Nyquist lines zeroed."""
    kx, ky = wavenumber_axes(n, domain)
    kxg, kyg = np.meshgrid(kx, ky, indexing="ij")
    kmag = np.hypot(kxg, kyg)
    phi = np.arctan2(kyg, kxg)
    density = np.zeros((n, n))
    pos = kmag > 0
    density[pos] = (
        omnidirectional_swell(kmag[pos], alpha, peak_wavenumber, enhancement)
        * cosine_power_spreading(phi[pos], wave_direction, spread_exponent)
        / kmag[pos]
    )
    # Nyquist row/column: self-mirrored cells, zeroed (see module docstring)
    density[n // 2, :] = 0.0
    density[:, n // 2] = 0.0
    return SpectralGrid(n=n, domain=domain, kx=kx, ky=ky, density=density)


def half_plane_signs(n: int) -> np.ndarray:
    """Partition of the FFT grid into conjugate pairs.

    +1 marks a cell in the chosen independent half plane, -1 its mirror
    at the negated wavenumber, 0 the four self-conjugate cells (DC and
    shared Nyquist corners). The split: cells with ky > 0 are +1; on the
    two rows where ky is 0 or Nyquist the sign of kx decides. The
    Nyquist frequency (stored at index n/2 as the negative frequency)
    mirrors onto itself in each axis.
    """
    freq = (np.fft.fftfreq(n) * n).astype(int)
    fx, fy = np.meshgrid(freq, freq, indexing="ij")
    signs = np.zeros((n, n), dtype=np.int8)
    nyq = -(n // 2)
    signs[fy > 0] = 1
    signs[(fy < 0) & (fy != nyq)] = -1
    edge_rows = (fy == 0) | (fy == nyq)
    signs[edge_rows & (fx > 0)] = 1
    signs[edge_rows & (fx < 0) & (fx != nyq)] = -1
    signs[np.isin(fx, (0, nyq)) & np.isin(fy, (0, nyq))] = 0
    return signs


def mirror_indices(n: int) -> np.ndarray:
    """Index map m -> -m mod n, pairing each FFT cell with its conjugate."""
    return (-np.arange(n)) % n


def hermitian_amplitudes(grid: SpectralGrid, rng: np.random.Generator) -> np.ndarray:
    """Draw FFT coefficients zhat with conjugate symmetry.

    Each +1 cell gets sqrt(S_cell * dkx * dky / 2) * (g1 + i g2) with g1,
    g2 standard normal; each -1 cell is the conjugate of its mirror. The
    self-conjugate cells would be drawn real (amplitude * sqrt(2) * g1),
    but carry zero spectral mass here because DC and the Nyquist lines
    are zeroed. The returned array is scaled by n^2 so that
    numpy.fft.ifft2 applied to it gives the surface in meters.
    """
    n = grid.n
    signs = half_plane_signs(n)
    mir = mirror_indices(n)
    g1 = rng.standard_normal((n, n))
    g2 = rng.standard_normal((n, n))
    amplitude = np.sqrt(grid.density * grid.cell_area / 2.0)
    zhat = amplitude * (g1 + 1j * g2)
    mirrored = np.conj(zhat[np.ix_(mir, mir)])
    zhat = np.where(signs == -1, mirrored, zhat)
    zhat = np.where(signs == 0, np.sqrt(2.0) * amplitude * g1, zhat)
    return zhat * (n * n)


def surface_rng(seed: int) -> np.random.Generator:
    """Counter-based generator for the surface draw of a given master seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, SURFACE_STREAM))))


def synthesize_surface(grid: SpectralGrid, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """One surface realization; returns (z real n-by-n, zhat coefficients)."""
    zhat = hermitian_amplitudes(grid, surface_rng(seed))
    z = np.fft.ifft2(zhat)
    return z.real.copy(), zhat


def significant_wave_height(z: np.ndarray) -> float:
    """Four times the standard deviation of the surface elevation."""
    return 4.0 * float(np.std(z))
