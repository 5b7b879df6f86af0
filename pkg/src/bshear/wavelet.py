"""Orthonormal multiscale wavelet layer on the digitized square.

Separable periodized DWT built from hard-coded orthonormal QMF filters, with
the index bookkeeping needed by the hybrid construction: every coefficient is
addressed by (scale j, center m, orientation upsilon) where j is the dyadic
frequency octave (an atom at scale j has spatial extent ~ 2**-j in domain
units) and upsilon = 0 marks the coarse scaling block.

Normalization convention used throughout the package: grid functions live in
the pixel-area-weighted inner product <f, g> = sum(f*g) / n**2, atoms have
unit norm in that inner product, and analysis coefficients are plain ell^2
sequences, so Parseval reads ||analysis(f)||_2 = ||f||.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError
from .geometry import DigitalDomain

# Orthonormal quadrature-mirror lowpass filters (unit-norm, sum = sqrt(2)).
_QMF = {
    "haar": np.array([0.7071067811865476, 0.7071067811865476]),
    "db2": np.array(
        [0.48296291314469025, 0.836516303737469, 0.22414386804185735, -0.12940952255092145]
    ),
    "db3": np.array(
        [
            0.3326705529509569,
            0.8068915093133388,
            0.4598775021193313,
            -0.13501102001039084,
            -0.08544127388224149,
            0.035226291882100656,
        ]
    ),
    "db4": np.array(
        [
            0.23037781330885523,
            0.7148465705525415,
            0.6308807679295904,
            -0.02798376941698385,
            -0.18703481171888114,
            0.030841381835986965,
            0.032883011666982945,
            -0.010597401784997278,
        ]
    ),
}

# Relative amplitude threshold defining digital support radii.
EPS_SUPP = 1.0e-3


def qmf_highpass(lo: np.ndarray) -> np.ndarray:
    """Mirror filter g[k] = (-1)^k h[L-1-k]."""
    sign = (-1.0) ** np.arange(lo.size)
    return sign * lo[::-1]


@dataclass(frozen=True, slots=True)
class WaveletIndex:
    """Address of one atom: octave j, center m (domain units), orientation."""

    j: int
    m: tuple[float, float]
    upsilon: int


@lru_cache(maxsize=64)
def _gather_idx(size: int, taps: int) -> np.ndarray:
    """(taps, size//2) gather table: column i holds (2i + k) mod size."""
    i = 2 * np.arange(size // 2)
    k = np.arange(taps)
    return (i[None, :] + k[:, None]) % size


def _analyze_axis(x: np.ndarray, lo: np.ndarray, hi: np.ndarray, axis: int):
    x = np.moveaxis(x, axis, -1)
    idx = _gather_idx(x.shape[-1], lo.size)
    g = x[..., idx]
    a = np.einsum("k,...kn->...n", lo, g)
    d = np.einsum("k,...kn->...n", hi, g)
    return np.moveaxis(a, -1, axis), np.moveaxis(d, -1, axis)


def _synthesize_axis(a: np.ndarray, d: np.ndarray, lo: np.ndarray, hi: np.ndarray, axis: int):
    a = np.moveaxis(a, axis, -1)
    d = np.moveaxis(d, axis, -1)
    size = a.shape[-1] * 2
    up_a = np.zeros(a.shape[:-1] + (size,))
    up_d = np.zeros_like(up_a)
    up_a[..., ::2] = a
    up_d[..., ::2] = d
    x = np.zeros_like(up_a)
    for k in range(lo.size):
        x += lo[k] * np.roll(up_a, k, axis=-1)
        x += hi[k] * np.roll(up_d, k, axis=-1)
    return np.moveaxis(x, -1, axis)


def dwt2(f: np.ndarray, lo: np.ndarray, hi: np.ndarray, levels: int) -> dict:
    """Periodized separable 2-D DWT over the last two axes (leading axes are
    treated as a batch).

    Returns {"ll": coarse array, (level, upsilon): detail arrays} with level 1
    the finest.  Orientation 1 = detail along the last axis, 2 = detail along
    the second-to-last, 3 = diagonal.
    """
    out = {}
    cur = f
    for lev in range(1, levels + 1):
        a1, d1 = _analyze_axis(cur, lo, hi, axis=-1)
        aa, da = _analyze_axis(a1, lo, hi, axis=-2)
        ad, dd = _analyze_axis(d1, lo, hi, axis=-2)
        out[(lev, 1)] = ad
        out[(lev, 2)] = da
        out[(lev, 3)] = dd
        cur = aa
    out["ll"] = cur
    return out


def idwt2(coeffs: dict, lo: np.ndarray, hi: np.ndarray, levels: int) -> np.ndarray:
    cur = coeffs["ll"]
    for lev in range(levels, 0, -1):
        a1 = _synthesize_axis(cur, coeffs[(lev, 2)], lo, hi, axis=-2)
        d1 = _synthesize_axis(coeffs[(lev, 1)], coeffs[(lev, 3)], lo, hi, axis=-2)
        cur = _synthesize_axis(a1, d1, lo, hi, axis=-1)
    return cur


class WaveletSystem:
    """Orthonormal wavelet basis of the n-by-n grid, octave-indexed.

    Built by :func:`build_wavelet_system`; immutable afterwards.
    """

    def __init__(self, domain: DigitalDomain, family: str, levels: int):
        if family not in _QMF:
            raise ConfigurationError(
                f"unknown wavelet family {family!r}; supported: {sorted(_QMF)}"
            )
        n = domain.n
        p = int(np.log2(n))
        if levels < 1:
            raise ConfigurationError("need at least one scale")
        if levels > p - 2:
            raise ConfigurationError(
                f"{levels} scales on an n={n} grid leaves a degenerate coarse block; "
                f"maximum is {p - 2}"
            )
        lo = _QMF[family]
        if n >> levels < lo.size:
            raise ConfigurationError(
                f"coarse block {n >> levels} is smaller than the {family} filter"
            )
        self.domain = domain
        self.family = family
        self.levels = levels
        self.lo = lo
        self.hi = qmf_highpass(lo)
        self.j0 = p - levels
        self.j_max = p - 1  # finest detail octave
        # canonical block order: scaling block, then detail coarse -> fine
        self.blocks = [(self.j0, 0)] + [
            (j, up) for j in range(self.j0, p) for up in (1, 2, 3)
        ]
        self._block_sizes = {(j, up): n >> (p - j) for (j, up) in self.blocks}
        self.size = sum(s * s for s in self._block_sizes.values())
        assert self.size == n * n
        self._offsets = {}
        off = 0
        for b in self.blocks:
            s = self._block_sizes[b]
            self._offsets[b] = off
            off += s * s
        self._support = self._measure_support()
        self.q_w1 = max(r * 2.0**j for (j, up), r in self._support.items())
        self.q_w0 = self.q_w1  # orthonormal basis: dual atoms = primal atoms
        self.q_w2 = 1.0  # lattice spacing at octave j is exactly 2**-j
        self._indices = None

    # -- index bookkeeping -------------------------------------------------

    def level_of(self, j: int) -> int:
        """DWT level (1 = finest) of detail octave j."""
        return int(np.log2(self.domain.n)) - j

    def block_shape(self, j: int, upsilon: int) -> tuple[int, int]:
        s = self._block_sizes[(j, upsilon)]
        return (s, s)

    def centers_of(self, j: int) -> np.ndarray:
        """Nominal atom centers along one axis for octave j, in domain units."""
        s = self.domain.n >> (int(np.log2(self.domain.n)) - j)
        return (np.arange(s) + 0.5) / s

    @property
    def indices(self) -> list[WaveletIndex]:
        """All of Theta in canonical (stacked) order.  Materialized lazily."""
        if self._indices is None:
            out = []
            for j, up in self.blocks:
                c = self.centers_of(j)
                s = c.size
                for i1 in range(s):
                    for i2 in range(s):
                        out.append(WaveletIndex(j=j, m=(c[i1], c[i2]), upsilon=up))
            self._indices = out
        return self._indices

    def scale_vector(self) -> np.ndarray:
        """Octave j of every stacked coefficient."""
        parts = [
            np.full(self._block_sizes[b] ** 2, b[0], dtype=np.int64) for b in self.blocks
        ]
        return np.concatenate(parts)

    # -- flattening --------------------------------------------------------

    def flatten(self, coeffs: dict) -> np.ndarray:
        parts = [coeffs["ll"].ravel()]
        p = int(np.log2(self.domain.n))
        for j in range(self.j0, p):
            lev = p - j
            for up in (1, 2, 3):
                parts.append(coeffs[(lev, up)].ravel())
        return np.concatenate(parts)

    def unflatten(self, vec: np.ndarray) -> dict:
        if vec.size != self.size:
            raise ValueError(f"expected {self.size} coefficients, got {vec.size}")
        out = {}
        p = int(np.log2(self.domain.n))
        s0 = self._block_sizes[(self.j0, 0)]
        out["ll"] = vec[: s0 * s0].reshape(s0, s0)
        off = s0 * s0
        for j in range(self.j0, p):
            lev = p - j
            for up in (1, 2, 3):
                s = self._block_sizes[(j, up)]
                out[(lev, up)] = vec[off : off + s * s].reshape(s, s)
                off += s * s
        return out

    # -- support measurement -------------------------------------------------

    def _measure_support(self) -> dict:
        """Max distance from the nominal center at which any atom of a block
        exceeds EPS_SUPP of its peak amplitude, in domain units, measured on a
        mid-grid atom (no wrap)."""
        n = self.domain.n
        out = {}
        for j, up in self.blocks:
            s = self._block_sizes[(j, up)]
            pos = (s // 2, s // 2)
            atom = self._atom_grid(j, up, pos)
            c = self.centers_of(j)
            m = (c[pos[0]], c[pos[1]])
            amp = np.abs(atom)
            keep = amp > EPS_SUPP * amp.max()
            ii, jj = np.nonzero(keep)
            x1 = (ii + 0.5) / n - m[0]
            x2 = (jj + 0.5) / n - m[1]
            # circular metric, though mid-grid atoms never wrap
            x1 = (x1 + 0.5) % 1.0 - 0.5
            x2 = (x2 + 0.5) % 1.0 - 0.5
            out[(j, up)] = float(np.sqrt(x1**2 + x2**2).max())
        return out

    def _atom_grid(self, j: int, upsilon: int, pos: tuple[int, int]) -> np.ndarray:
        coeffs = self.zero_coeffs()
        if upsilon == 0:
            coeffs["ll"][pos] = 1.0
        else:
            coeffs[(self.level_of(j), upsilon)][pos] = 1.0
        return self.domain.n * idwt2(coeffs, self.lo, self.hi, self.levels)

    def zero_coeffs(self) -> dict:
        p = int(np.log2(self.domain.n))
        out = {"ll": np.zeros((self._block_sizes[(self.j0, 0)],) * 2)}
        for j in range(self.j0, p):
            for up in (1, 2, 3):
                s = self._block_sizes[(j, up)]
                out[(p - j, up)] = np.zeros((s, s))
        return out


def build_wavelet_system(domain: DigitalDomain, family: str, j_max: int) -> WaveletSystem:
    """Build the orthonormal wavelet layer with j_max decomposition scales."""
    return WaveletSystem(domain, family, j_max)


def wavelet_analysis(system: WaveletSystem, f: np.ndarray) -> np.ndarray:
    """Stacked coefficients <f, omega_(j,m,upsilon)> in the area-weighted
    inner product, canonical order."""
    n = system.domain.n
    if f.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} grid, got {f.shape}")
    coeffs = dwt2(np.asarray(f, dtype=float), system.lo, system.hi, system.levels)
    return system.flatten(coeffs) / n


def wavelet_synthesis(system: WaveletSystem, c: np.ndarray) -> np.ndarray:
    """Adjoint of :func:`wavelet_analysis` (equals its inverse: orthonormal)."""
    c = np.asarray(c, dtype=float)
    coeffs = system.unflatten(c)
    return system.domain.n * idwt2(coeffs, system.lo, system.hi, system.levels)


def wavelet_atom(system: WaveletSystem, index, upsilon: int | None = None,
                 pos: tuple[int, int] | None = None) -> np.ndarray:
    """Rasterized unit-norm atom.

    Accepts either a WaveletIndex or the triple (j, upsilon, pos) with pos the
    lattice position inside the octave-j block.
    """
    if isinstance(index, WaveletIndex):
        j, upsilon = index.j, index.upsilon
        s = system._block_sizes[(j, upsilon)]
        pos = (int(round(index.m[0] * s - 0.5)), int(round(index.m[1] * s - 0.5)))
    else:
        j = index
    if (j, upsilon) not in system._block_sizes:
        raise ValueError(f"no block (j={j}, upsilon={upsilon}) in this system")
    s = system._block_sizes[(j, upsilon)]
    if not (0 <= pos[0] < s and 0 <= pos[1] < s):
        raise ValueError(f"position {pos} outside the {s}x{s} octave-{j} lattice")
    return system._atom_grid(j, upsilon, pos)
