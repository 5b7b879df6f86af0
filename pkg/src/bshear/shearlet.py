"""Cone-adapted digital shearlet system built from separable spline generators.

Filters are sampled in the frequency domain: a 1-D B-spline pair (phi1, psi1)
with closed-form transforms is evaluated at parabolically scaled and sheared
frequencies, one filter per (scale j, shear k, cone iota) channel, plus a
single isotropic lowpass.  Spatial atoms are real, even, and normalized to
unit norm in the pixel-area-weighted inner product; analysis is plain
FFT filtering, so the whole stack is matrix-free.

Scale bookkeeping: the internal scale index j runs 0 (coarsest directional
ring) to n_scales-1 (finest); each channel also carries the absolute dyadic
octave of its frequency ring so selections can be made in domain units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .errors import ConfigurationError
from .geometry import DigitalDomain

EPS_SUPP = 1.0e-3     # relative amplitude threshold for support radii
TRUNC_TOL = 4.0e-3    # energy budget when boxing an atom beyond its nominal support

# Generator recipes.  "qmf" kind: the radial factor comes from the iterated
# responses of an orthonormal filter pair (exact dyadic partition of unity,
# which keeps the masked frame operator's frequency profile nearly level),
# the shear factor is a first-order box spline whose integer translates
# satisfy sum_k sinc^2(v - k) = 1.  "spline" kind: fully closed-form pair,
# psi1 an alpha-th difference of a width-2 spline of order beta, phi1 a
# beta-th order spline.
GENERATORS = {
    "qmf-db4": ("qmf", "db4"),
    "qmf-db2": ("qmf", "db2"),
    "bspline": ("spline", 4, 3),
    "bspline-soft": ("spline", 2, 3),
}
DEFAULT_GENERATOR = "bspline"

# vanishing-moment / frequency-decay exponents recorded as metadata
_GENERATOR_META = {
    "qmf-db4": {"alpha_sh": 4, "beta_sh": 1},
    "qmf-db2": {"alpha_sh": 2, "beta_sh": 1},
    "bspline": {"alpha_sh": 4, "beta_sh": 3},
    "bspline-soft": {"alpha_sh": 2, "beta_sh": 3},
}

# For the spline kind, dyadic rings are anchored at 1.1 * 2^octave: the
# detune keeps the generators' discrete zero sets off the integer frequency
# grid, which would otherwise stack up dyadically and kill the lower bound.
RING_ANCHOR = 1.1
LOWPASS_WIDTH = 1.5


def shear_count(j: int) -> int:
    """Number of shears per cone at scale j for the full ladder: 2*ceil(2^(j/2))+1."""
    if j < 0:
        raise ValueError(f"scale must be nonnegative, got {j}")
    c = math.isqrt(2**j)
    if c * c < 2**j:
        c += 1
    return 2 * c + 1


def default_ladder(n_scales: int) -> list[int]:
    """Shear levels ceil(sigma/2) for sigma = 1..n_scales, e.g. [1, 1, 2, 2]."""
    return [(s + 1) // 2 for s in range(1, n_scales + 1)]


def _phi1_hat(x: np.ndarray, beta: int) -> np.ndarray:
    return np.sinc(x) ** beta


def _psi1_hat(x: np.ndarray, alpha: int, beta: int) -> np.ndarray:
    # alpha-th difference of a width-2 spline: zeros only at even integers,
    # so the next-finer dyadic ring always covers this ring's zero set
    return (2.0 * np.sin(np.pi * x / 2.0)) ** alpha * np.sinc(x / 2.0) ** beta


def _qmf_radial(n: int, levels: int, lo: np.ndarray):
    """Magnitudes of the iterated nonsubsampled responses of an orthonormal
    pair: W[0] the finest band, ..., plus the residual lowpass.  They tile
    exactly: sum_l W_l^2 + Low^2 = 1 on the whole frequency axis."""
    hi = (-1.0) ** np.arange(lo.size) * lo[::-1]
    om = 2.0 * np.pi * np.fft.fftfreq(n)

    def resp(filt, dil):
        k = np.arange(filt.size)
        return sum(filt[i] * np.exp(-1j * om * dil * k[i]) for i in range(filt.size))

    bands = []
    acc = np.ones(n, dtype=complex)
    for lev in range(1, levels + 1):
        bands.append(np.abs(acc * resp(hi, 2 ** (lev - 1))) / np.sqrt(2) ** lev)
        acc = acc * resp(lo, 2 ** (lev - 1))
    low = np.abs(acc) / np.sqrt(2) ** levels
    return bands, low


def _symmetrize(F: np.ndarray) -> np.ndarray:
    """Average F with its frequency negation so the spatial atom is real."""
    Fn = np.roll(F[::-1, ::-1], (1, 1), axis=(0, 1))
    return 0.5 * (F + Fn)


@dataclass(frozen=True, slots=True)
class ShearletIndex:
    """Address of one atom: scale j, shear k, lattice position m, cone iota."""

    j: int
    k: int
    m: tuple[int, int]
    iota: int


@dataclass
class Channel:
    """One (j, k, iota) filter with its sampling lattice and support box."""

    j: int
    k: int
    iota: int
    octave: int
    stride: tuple[int, int]
    filt: np.ndarray                 # (n, n) real, even, normalized
    box_r: tuple[int, int] = (0, 0)  # exact support half-widths in pixels
    radius: float = 0.0              # circumscribed support radius, pixels

    @property
    def lattice_shape(self) -> tuple[int, int]:
        n = self.filt.shape[0]
        return (n // self.stride[0], n // self.stride[1])

    @property
    def wraps(self) -> bool:
        """True when the support box does not fit inside the grid."""
        n = self.filt.shape[0]
        return 2 * self.box_r[0] + 1 >= n or 2 * self.box_r[1] + 1 >= n


class ShearletSystem:
    """Frequency-domain shearlet filter bank on an n-by-n grid."""

    def __init__(self, domain: DigitalDomain, n_scales: int,
                 shears_per_scale=None, generator: str = DEFAULT_GENERATOR,
                 strides=None):
        """strides: optional per-scale (narrow, wide) lattice steps replacing
        the default ladder (1 px at the finest scale, doubled per coarser
        scale on the narrow axis, every other scale on the wide axis).  The
        translation lattice is a free parameter of the system; sparser
        lattices trade redundancy for leaner coefficient sets."""
        if generator not in GENERATORS:
            raise ConfigurationError(
                f"unknown generator {generator!r}; supported: {sorted(GENERATORS)}"
            )
        n = domain.n
        p = int(np.log2(n))
        if n_scales < 0:
            raise ConfigurationError("scale count must be nonnegative")
        if n_scales > p - 2:
            raise ConfigurationError(
                f"{n_scales} scales on an n={n} grid puts the coarsest ring below "
                f"4 cycles; maximum is {p - 2}"
            )
        if shears_per_scale is None:
            shears_per_scale = default_ladder(n_scales)
        shears_per_scale = [int(s) for s in shears_per_scale]
        if len(shears_per_scale) != n_scales:
            raise ConfigurationError(
                f"ladder length {len(shears_per_scale)} != scale count {n_scales}"
            )
        if any(s < 0 for s in shears_per_scale):
            raise ConfigurationError("shear levels must be nonnegative")
        if strides is not None:
            strides = [tuple(int(v) for v in st) for st in strides]
            if len(strides) != n_scales:
                raise ConfigurationError(
                    f"strides length {len(strides)} != scale count {n_scales}"
                )
            for st in strides:
                if any(v < 1 or (v & (v - 1)) or v > domain.n for v in st):
                    raise ConfigurationError(
                        f"strides must be powers of two within the grid, got {st}"
                    )

        self.domain = domain
        self.n_scales = n_scales
        self.custom_strides = strides
        self.shears_per_scale = shears_per_scale
        self.generator = generator
        self.generator_meta = dict(_GENERATOR_META[generator])
        self.eps_supp = EPS_SUPP
        self.channels: list[Channel] = []
        self.q_sh = 1.0
        if n_scales > 0:
            self._build()
        self._half_stack = None
        self._half_subsets = {}
        self._atom_cache = {}
        self._interior_cache = None

    # -- construction --------------------------------------------------------

    def _build(self):
        n = self.domain.n
        p = int(np.log2(n))
        S = self.n_scales
        spec = GENERATORS[self.generator]
        kind = spec[0]
        xi = np.fft.fftfreq(n) * n
        xi1 = xi[:, None]
        xi2 = xi[None, :]

        if kind == "qmf":
            from .wavelet import _QMF

            qmf_lo = _QMF[spec[1]]
            bands, low1 = _qmf_radial(n, S, qmf_lo)
            anchor = 1.0
            # angular window: first-order box spline (exact sinc^2 tiling)
            ang_beta = 1
            lowpass = low1[:, None] * low1[None, :]
            fir_half = {
                lev: ((qmf_lo.size - 1) * (2**lev - 1) + qmf_lo.size) / 2.0 + 2.0
                for lev in range(1, S + 1)
            }
        else:
            alpha, beta = spec[1], spec[2]
            anchor = RING_ANCHOR
            ang_beta = beta
            a0 = 2.0 ** (p - S) * RING_ANCHOR * LOWPASS_WIDTH
            lowpass = _phi1_hat(xi1 / a0, beta) * _phi1_hat(xi2 / a0, beta)

        chans = []
        if self.custom_strides is not None:
            s_coarse = min(self.custom_strides[0])
        else:
            s_coarse = 2 ** (S - 1)
        chans.append(Channel(j=0, k=0, iota=0, octave=p - S,
                             stride=(s_coarse, s_coarse), filt=lowpass))
        for j in range(S):
            kappa = self.shears_per_scale[j]
            a = 2.0 ** (p - S + j) * anchor
            b = a / 2.0**kappa
            sigma = j + 1
            if self.custom_strides is not None:
                s_narrow, s_wide = self.custom_strides[j]
            else:
                s_narrow = 2 ** (S - sigma)
                s_wide = 2 ** ((S - sigma + 1) // 2)
            if kind == "qmf":
                rad1 = bands[S - 1 - j][:, None] * np.ones((1, n))
                rad2 = bands[S - 1 - j][None, :] * np.ones((n, 1))
            for iota in (1, -1):
                for k in range(-(2**kappa), 2**kappa + 1):
                    if iota == 1:
                        radial_part = rad1 if kind == "qmf" else \
                            _psi1_hat(xi1 / a, alpha, beta)
                        F = radial_part * _phi1_hat(xi2 / b - k * xi1 / a, ang_beta)
                        stride = (s_narrow, s_wide)
                    else:
                        radial_part = rad2 if kind == "qmf" else \
                            _psi1_hat(xi2 / a, alpha, beta)
                        F = radial_part * _phi1_hat(xi1 / b - k * xi2 / a, ang_beta)
                        stride = (s_wide, s_narrow)
                    chans.append(Channel(j=j, k=k, iota=iota, octave=p - S + j,
                                         stride=stride, filt=F))

        # Normalize, then box every atom.  The continuum generators are
        # compactly supported; the sampled atoms pick up small tails from the
        # Nyquist cutoff (spline kind) or the magnitude rendering (qmf kind),
        # so each atom is truncated at the larger of its nominal support box
        # and its measured TRUNC_TOL energy box and renormalized.  Afterwards
        # the support box is exact, which makes the interior-selection
        # geometry leak-free.
        d = np.minimum(np.arange(n), n - np.arange(n)).astype(float)
        radial = []
        for ch in chans:
            F = _symmetrize(ch.filt)
            nrm = np.linalg.norm(F)
            if nrm == 0:
                raise ConfigurationError(
                    f"degenerate filter at (j={ch.j}, k={ch.k}, iota={ch.iota})"
                )
            atom = sfft.irfft2(
                np.ascontiguousarray(F[:, : n // 2 + 1]) * (n * n / nrm), s=(n, n)
            )
            if kind == "qmf":
                a = 2.0 ** (p - S + ch.j)
                b = a / 2.0 ** self.shears_per_scale[ch.j] if ch.iota else a
                if ch.iota == 0:
                    side = (qmf_lo.size - 1) * (2**S - 1) / 2.0 + 2.0
                    r_nom = (side, side)
                else:
                    lev = S - ch.j
                    narrow = fir_half[lev] + abs(ch.k) * n / (2.0 * a)
                    wide = n / (2.0 * b)
                    r_nom = (narrow, wide) if ch.iota == 1 else (wide, narrow)
            else:
                psi_half = beta / 4.0 + alpha / 4.0
                phi_half = beta / 2.0
                if ch.iota == 0:
                    r_nom = (phi_half * n / a0, phi_half * n / a0)
                else:
                    a = 2.0 ** (p - S + ch.j) * RING_ANCHOR
                    b = a / 2.0 ** self.shears_per_scale[ch.j]
                    narrow = (psi_half + phi_half * abs(ch.k)) * n / a
                    wide = phi_half * n / b
                    r_nom = (narrow, wide) if ch.iota == 1 else (wide, narrow)
            e = atom**2
            total = e.sum()
            box = []
            for ax in (0, 1):
                marg = e.sum(axis=1 - ax)
                r_eng = self._axis_radius(marg, d, total)
                box.append(min(int(max(math.ceil(r_nom[ax]), r_eng)), n // 2 - 1))
            mask1 = d <= box[0]
            mask2 = d <= box[1]
            atom *= mask1[:, None] * mask2[None, :]
            atom *= n / math.sqrt((atom**2).sum())
            ch.filt = sfft.fft2(atom).real
            ch.box_r = (box[0], box[1])
            ch.radius = math.hypot(box[0], box[1])
            if ch.iota == 1 and ch.k == 0:
                radial.append(ch.radius / n * 2.0 ** (ch.j / 2.0))
        self.channels = chans
        self.q_sh = 2.0 * max(radial)

    @staticmethod
    def _axis_radius(marg: np.ndarray, d: np.ndarray, total: float) -> int:
        order = np.argsort(d)
        cum = np.cumsum(marg[order])
        cut = np.searchsorted(cum, (1.0 - 0.5 * TRUNC_TOL) * total)
        return int(d[order[min(cut, d.size - 1)]])

    # -- transforms ------------------------------------------------------------

    def _halves(self, idx=None) -> np.ndarray:
        if self._half_stack is None:
            n = self.domain.n
            self._half_stack = np.ascontiguousarray(
                np.stack([ch.filt[:, : n // 2 + 1] for ch in self.channels])
            )
            self._half_subsets = {}
        if idx is None:
            return self._half_stack
        key = tuple(idx)
        if key not in self._half_subsets:
            self._half_subsets[key] = np.ascontiguousarray(self._half_stack[list(idx)])
        return self._half_subsets[key]

    def coefficient_stack(self, f: np.ndarray, idx=None) -> np.ndarray:
        """Inner products with every translate, one n-by-n map per channel
        (restricted to the channel subset idx when given)."""
        n = self.domain.n
        F = sfft.rfft2(np.asarray(f, dtype=float))
        return sfft.irfft2(F[None] * self._halves(idx), s=(n, n), workers=-1) / (n * n)

    def adjoint_stack(self, Z: np.ndarray, idx=None) -> np.ndarray:
        """Adjoint of :meth:`coefficient_stack` over the same channel subset."""
        n = self.domain.n
        spec = (sfft.rfft2(np.asarray(Z, dtype=float), workers=-1) * self._halves(idx)).sum(axis=0)
        return sfft.irfft2(spec, s=(n, n))

    def frame_symbol(self) -> np.ndarray:
        """Frequency symbol of the non-subsampled frame operator: sum |filt|^2 / n^2."""
        n = self.domain.n
        sym = np.zeros((n, n))
        for ch in self.channels:
            sym += ch.filt**2
        return sym / (n * n)

    def interior_energy_fraction(self) -> list[np.ndarray]:
        """Per channel, the fraction of atom energy that stays inside the
        square when the atom is translated (without wrapping) to each pixel:
        a rectangle sum over the in-range support offsets, evaluated with 2-D
        prefix sums.  Cached: it does not depend on any selection offset."""
        if self._interior_cache is None:
            n = self.domain.n
            c = n // 2
            pos = np.arange(n)
            lo = np.maximum(0, c - pos)       # offsets >= -i stay inside
            hi = np.minimum(n, c + n - pos)   # offsets <= n-1-i stay inside
            out = []
            for ch in self.channels:
                # centered layout: row r holds the signed support offset r - c
                A = np.fft.fftshift(self.base_atom(ch.j, ch.k, ch.iota)) ** 2
                P = np.zeros((n + 1, n + 1))
                P[1:, 1:] = A.cumsum(0).cumsum(1)
                inside = (P[hi[:, None], hi[None, :]] - P[lo[:, None], hi[None, :]]
                          - P[hi[:, None], lo[None, :]] + P[lo[:, None], lo[None, :]])
                out.append(np.clip(inside / A.sum(), 0.0, 1.0))
            self._interior_cache = out
        return self._interior_cache

    def channel(self, j: int, k: int, iota: int) -> Channel:
        for ch in self.channels:
            if (ch.j, ch.k, ch.iota) == (j, k, iota):
                return ch
        raise ValueError(f"no channel (j={j}, k={k}, iota={iota})")

    def base_atom(self, j: int, k: int, iota: int) -> np.ndarray:
        key = (j, k, iota)
        if key not in self._atom_cache:
            n = self.domain.n
            ch = self.channel(j, k, iota)
            self._atom_cache[key] = sfft.irfft2(
                np.ascontiguousarray(ch.filt[:, : n // 2 + 1]), s=(n, n)
            )
        return self._atom_cache[key]


def build_shearlet_system(domain: DigitalDomain, j_max: int, shears_per_scale=None,
                          generator: str = DEFAULT_GENERATOR,
                          strides=None) -> ShearletSystem:
    """Build the cone-adapted filter bank with j_max scales."""
    return ShearletSystem(domain, j_max, shears_per_scale, generator, strides)


class ShearletCoefficients:
    """Per-channel coefficient arrays, either full n-by-n or stride-decimated."""

    def __init__(self, system: ShearletSystem, arrays: list[np.ndarray], subsampled: bool):
        self.system = system
        self.arrays = arrays
        self.subsampled = subsampled

    def flatten(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays]) if self.arrays else np.zeros(0)

    @classmethod
    def zeros(cls, system: ShearletSystem, subsampled: bool) -> "ShearletCoefficients":
        n = system.domain.n
        arrays = []
        for ch in system.channels:
            shape = ch.lattice_shape if subsampled else (n, n)
            arrays.append(np.zeros(shape))
        return cls(system, arrays, subsampled)


def shearlet_analysis(system: ShearletSystem, f: np.ndarray,
                      subsampled: bool = False) -> ShearletCoefficients:
    """Channel-wise inner products of f with the atoms.

    Non-subsampled: every pixel translate.  Subsampled: decimated to each
    scale's stride lattice.
    """
    n = system.domain.n
    f = np.asarray(f, dtype=float)
    if f.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} grid, got {f.shape}")
    if not system.channels:
        return ShearletCoefficients(system, [], subsampled)
    stack = system.coefficient_stack(f)
    if not subsampled:
        return ShearletCoefficients(system, list(stack), subsampled=False)
    arrays = [
        stack[c][:: ch.stride[0], :: ch.stride[1]].copy()
        for c, ch in enumerate(system.channels)
    ]
    return ShearletCoefficients(system, arrays, subsampled=True)


def shearlet_synthesis(system: ShearletSystem, coeffs: ShearletCoefficients,
                       subsampled: bool | None = None) -> np.ndarray:
    """Exact adjoint of :func:`shearlet_analysis` (same subsampling mode)."""
    n = system.domain.n
    if subsampled is not None and subsampled != coeffs.subsampled:
        raise ValueError("subsampling mode of coefficients does not match request")
    if len(coeffs.arrays) != len(system.channels):
        raise ValueError(
            f"stack has {len(coeffs.arrays)} channels, system has {len(system.channels)}"
        )
    if not system.channels:
        return np.zeros((n, n))
    if coeffs.subsampled:
        full = np.zeros((len(system.channels), n, n))
        for c, ch in enumerate(system.channels):
            exp = ch.lattice_shape
            if coeffs.arrays[c].shape != exp:
                raise ValueError(
                    f"channel {c}: expected lattice {exp}, got {coeffs.arrays[c].shape}"
                )
            full[c][:: ch.stride[0], :: ch.stride[1]] = coeffs.arrays[c]
    else:
        full = np.stack(coeffs.arrays)
    return system.adjoint_stack(full)


def shearlet_atom(system: ShearletSystem, index: ShearletIndex) -> np.ndarray:
    """Unit-norm atom translated to lattice position index.m."""
    ch = system.channel(index.j, index.k, index.iota)
    base = system.base_atom(index.j, index.k, index.iota)
    shift = (index.m[0] * ch.stride[0], index.m[1] * ch.stride[1])
    return np.roll(base, shift, axis=(0, 1))
