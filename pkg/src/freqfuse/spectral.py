"""Frequency-domain decomposition of RGB images.

An image is an (h, w, 3) float array with intensities in [0, 1]. Each channel
is transformed with an unnormalized forward 2-D DFT (so F[0,0] is the plain
pixel sum), center-shifted, weighted by a Gaussian low- or high-pass mask,
shifted back, and inverted with the 1/(h*w)-normalized inverse transform.
The low and high masks are exact complements, so the two output components
sum back to the original image. Outputs are intentionally not clamped to
[0, 1]; clamping happens only when an image is exported.
"""

from dataclasses import dataclass

import numpy as np

DEFAULT_CUTOFF = 30.0
DEFAULT_GAMMA = 0.23

MODE_RANDOM = "random"
MODE_CONSTANT = "constant"


@dataclass(frozen=True)
class AttenuationSpec:
    """Spectral damping configuration.

    gamma: upper bound of the uniform distribution the damping matrix is
        drawn from, in [0, 1].
    seed: seed for the damping draws (PCG64; fixed, platform-independent).
    mode: "random" draws each cell i.i.d. from U(0, gamma); "constant"
        fills every cell with gamma (deterministic, for exact tests).
    share_branches: use one draw for both the low and the high branch
        instead of independent draws per branch.
    per_channel: draw a fresh matrix per RGB channel instead of sharing
        one matrix across the three channels of a branch.
    """

    gamma: float = DEFAULT_GAMMA
    seed: int = 0
    mode: str = MODE_RANDOM
    share_branches: bool = False
    per_channel: bool = False

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.mode not in (MODE_RANDOM, MODE_CONSTANT):
            raise ValueError(f"unknown attenuation mode {self.mode!r}")


def validate_image(image) -> np.ndarray:
    """Check (h, w, 3) shape and [0, 1] intensities; return a float64 view."""
    arr = np.asarray(image, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (h, w, 3) image, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"image dimensions must be positive, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("image intensities must lie in [0, 1]")
    return arr


def dft2d(plane) -> np.ndarray:
    """Unnormalized forward 2-D DFT of a real plane; F[0,0] = sum of values."""
    arr = np.asarray(plane, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D plane, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("cannot transform an empty plane")
    return np.fft.fft2(arr)


def idft2d(spectrum) -> np.ndarray:
    """Real part of the 1/(h*w)-normalized inverse 2-D DFT.

    When the input is conjugate-symmetric (i.e. the spectrum of a real
    plane), the discarded imaginary residue is asserted to be negligible.
    """
    arr = np.asarray(spectrum, dtype=complex)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty 2-D spectrum, got shape {arr.shape}")
    out = np.fft.ifft2(arr)
    if __debug__ and _is_conjugate_symmetric(arr):
        residue = np.abs(out.imag).max()
        assert residue < 1e-9, f"imaginary residue {residue:g} on a symmetric spectrum"
    return out.real


def _is_conjugate_symmetric(spectrum, tol=1e-9):
    h, w = spectrum.shape
    flipped = spectrum[(-np.arange(h)) % h][:, (-np.arange(w)) % w]
    return bool(np.abs(spectrum - np.conj(flipped)).max() <= tol)


def gaussian_masks(h: int, w: int, cutoff: float):
    """Complementary Gaussian low/high masks on the centered frequency grid.

    low[u, v] = exp(-D^2 / (2 * cutoff^2)) with D the Euclidean distance from
    (h//2, w//2); high = 1 - low, exact per cell.
    """
    if h < 1 or w < 1:
        raise ValueError(f"mask dimensions must be positive, got {h}x{w}")
    if cutoff <= 0:
        raise ValueError(f"cutoff must be positive, got {cutoff}")
    du = np.arange(h) - h // 2
    dv = np.arange(w) - w // 2
    d2 = du[:, None] ** 2 + dv[None, :] ** 2
    low = np.exp(-d2 / (2.0 * cutoff * cutoff))
    high = 1.0 - low
    return low, high


def _filter_channel(shifted_spectrum, mask):
    return idft2d(np.fft.ifftshift(shifted_spectrum * mask))


def decompose(image, cutoff: float = DEFAULT_CUTOFF):
    """Split an image into its low- and high-frequency components.

    Returns (low, high) as (h, w, 3) float arrays satisfying
    low + high == image up to transform round-off. Not clamped.
    """
    arr = validate_image(image)
    h, w, _ = arr.shape
    low_mask, high_mask = gaussian_masks(h, w, cutoff)
    low = np.empty_like(arr)
    high = np.empty_like(arr)
    for c in range(3):
        shifted = np.fft.fftshift(dft2d(arr[:, :, c]))
        low[:, :, c] = _filter_channel(shifted, low_mask)
        high[:, :, c] = _filter_channel(shifted, high_mask)
    return low, high


def attenuation_matrix(h: int, w: int, spec: AttenuationSpec) -> np.ndarray:
    """Damping matrix per the spec: U(0, gamma) draws or the constant gamma."""
    if h < 1 or w < 1:
        raise ValueError(f"matrix dimensions must be positive, got {h}x{w}")
    if spec.mode == MODE_CONSTANT:
        return np.full((h, w), spec.gamma)
    rng = np.random.default_rng(spec.seed)
    return rng.uniform(0.0, spec.gamma, size=(h, w))


def _attenuation_draws(h, w, spec, count):
    if spec.mode == MODE_CONSTANT:
        return [np.full((h, w), spec.gamma) for _ in range(count)]
    rng = np.random.default_rng(spec.seed)
    return [rng.uniform(0.0, spec.gamma, size=(h, w)) for _ in range(count)]


def decompose_attenuated(image, cutoff: float, spec: AttenuationSpec):
    """Decompose with each branch's masked spectrum damped elementwise.

    By default the low and high branches get independent damping draws and
    each draw is shared across the three RGB channels of its branch; see
    AttenuationSpec for the alternative granularities.
    """
    arr = validate_image(image)
    h, w, _ = arr.shape
    low_mask, high_mask = gaussian_masks(h, w, cutoff)

    n_branch = 1 if spec.share_branches else 2
    per_branch = 3 if spec.per_channel else 1
    draws = _attenuation_draws(h, w, spec, n_branch * per_branch)
    low_draws = draws[:per_branch]
    high_draws = draws[:per_branch] if spec.share_branches else draws[per_branch:]

    low = np.empty_like(arr)
    high = np.empty_like(arr)
    for c in range(3):
        shifted = np.fft.fftshift(dft2d(arr[:, :, c]))
        g_low = low_draws[c if spec.per_channel else 0]
        g_high = high_draws[c if spec.per_channel else 0]
        low[:, :, c] = _filter_channel(shifted, low_mask * g_low)
        high[:, :, c] = _filter_channel(shifted, high_mask * g_high)
    return low, high
