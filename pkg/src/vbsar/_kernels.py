"""Hot quadrature kernels with a compiled fast path and a numpy fallback.

The forward image model reduces, per cross-track row, to sums over scene
points j for every image position r of a Gaussian-windowed oscillatory
term. The compiled path walks only the window where the Gaussian factor
exceeds the configured cutoff; the numpy path evaluates the full n-by-n
matrix with masking. Both return identical shapes and agree to roundoff
(the summation orders differ, so bitwise equality is not guaranteed
across paths; each path on its own is deterministic).

Set the environment variable VBSAR_PURE_NUMPY=1 before import to force
the numpy path even when numba is installed.
"""

from __future__ import annotations

import os

import numpy as np

_FORCE_NUMPY = os.environ.get("VBSAR_PURE_NUMPY", "") == "1"

if not _FORCE_NUMPY:
    try:
        from numba import njit

        USING_NUMBA = True
    except ImportError:
        USING_NUMBA = False
else:
    USING_NUMBA = False


def _image_row_numpy(u, centers_scale, amp_j, chirp_j, width2_j, y, domain, amp_scale,
                     phase_slope, cutoff_log, deriv_re_j, deriv_im_j, want_deriv):
    """Vectorized full-matrix evaluation.

    Row r of the (r, j) matrix is the image position, column j the scene
    point. s is the azimuth shift, wrapped to the periodic domain.
    """
    n = y.shape[0]
    s = y[:, None] - y[None, :] - centers_scale * u[None, :]
    s -= domain * np.floor(s / domain + 0.5)
    log_gauss = -(np.pi**2) * s**2 / width2_j[None, :]
    phase = (phase_slope * u)[None, :] + chirp_j[None, :] * s
    keep = log_gauss >= cutoff_log
    term = np.where(keep, amp_j[None, :] * np.exp(log_gauss + 1j * phase), 0.0)
    image = amp_scale * term.sum(axis=1)
    if not want_deriv:
        return image, None
    bracket = deriv_re_j[None, :] * s - 1j * deriv_im_j[None, :]
    jac = amp_scale * (bracket * term)
    return image, jac


if USING_NUMBA:

    @njit(cache=True, nogil=True)
    def _image_row_numba(u, centers_scale, amp_j, chirp_j, width2_j, y, domain,
                         amp_scale, phase_slope, cutoff_log, deriv_re_j, deriv_im_j,
                         want_deriv):
        n = y.shape[0]
        h = y[1] - y[0]
        y0 = y[0]
        image = np.zeros(n, dtype=np.complex128)
        if want_deriv:
            jac = np.zeros((n, n), dtype=np.complex128)
        else:
            jac = np.zeros((1, 1), dtype=np.complex128)
        for j in range(n):
            # window half-width where the Gaussian factor is above cutoff
            s_cut = np.sqrt(-cutoff_log * width2_j[j]) / np.pi
            center = y[j] + centers_scale * u[j]
            half = int(s_cut / h) + 1
            if 2 * half + 1 >= n:
                lo, hi = 0, n
                windowed = False
            else:
                r_center = int(np.floor((center - y0) / h + 0.5))
                lo, hi = r_center - half, r_center + half + 1
                windowed = True
            cos_u = np.cos(phase_slope * u[j])
            sin_u = np.sin(phase_slope * u[j])
            for ridx in range(lo, hi):
                r = ridx % n if windowed else ridx
                s = y0 + r * h - center
                s -= domain * np.floor(s / domain + 0.5)
                log_gauss = -(np.pi**2) * s * s / width2_j[j]
                if log_gauss < cutoff_log:
                    continue
                phase = chirp_j[j] * s
                cos_p = np.cos(phase)
                sin_p = np.sin(phase)
                # exp(i(phase_slope*u + chirp*s)) assembled from the two factors
                c = cos_u * cos_p - sin_u * sin_p
                sn = sin_u * cos_p + cos_u * sin_p
                mag = amp_j[j] * np.exp(log_gauss)
                term = mag * complex(c, sn)
                image[r] += amp_scale * term
                if want_deriv:
                    jac[r, j] = amp_scale * term * complex(deriv_re_j[j] * s, -deriv_im_j[j])
        return image, jac


def image_row(u, centers_scale, amp_j, chirp_j, width2_j, y, domain, amp_scale,
              phase_slope, cutoff_log, deriv_re_j, deriv_im_j, want_deriv=False):
    """Evaluate one image row, optionally with its derivative matrix.

    Returns (image complex[n], jac complex[n, n] or None) where
    jac[r, j] = d image[r] / d u[j].
    """
    if USING_NUMBA:
        image, jac = _image_row_numba(
            u, centers_scale, amp_j, chirp_j, width2_j, y, domain, amp_scale,
            phase_slope, cutoff_log, deriv_re_j, deriv_im_j, want_deriv,
        )
        return image, (jac if want_deriv else None)
    return _image_row_numpy(
        u, centers_scale, amp_j, chirp_j, width2_j, y, domain, amp_scale,
        phase_slope, cutoff_log, deriv_re_j, deriv_im_j, want_deriv,
    )
