"""Hybrid boundary system: interior shearlets plus near-boundary wavelets.

Selection logic:

* a shearlet is kept when its support box, translated to its lattice
  position, fits inside the square without wrapping (its support then lies
  inside the domain with zero leakage, the boxes being exact);
* a wavelet (j, m, upsilon) is kept when a ball of radius
  2**-j (q_w0 + q_w1) around its center meets the boundary tube of width
  q_sh * 2**(-tau (j - t)), which for Euclidean balls and distance-sublevel
  tubes reduces to one inequality on d(m, boundary).

The stacked coefficient order is wavelet block first (canonical wavelet
order), then shearlet channels in canonical channel order, row-major over
each stride lattice.  Every stacked entry carries the scale j_n used by the
Sobolev weights 2**(j_n * s): the dyadic octave for wavelet entries and the
scale index of the filter ring for shearlet entries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .geometry import BinaryMask, DigitalDomain, distance_to_boundary
from .shearlet import ShearletIndex, ShearletSystem
from .wavelet import WaveletIndex, WaveletSystem, wavelet_analysis, wavelet_synthesis


@dataclass(frozen=True)
class HybridConfig:
    """Offsets and Sobolev order of a boundary system."""

    t: float
    tau: float = 1.0 / 3.0
    s: float = 0.0

    def __post_init__(self):
        if self.tau <= 0:
            raise ConfigurationError(f"tau must be positive, got {self.tau}")
        if self.s < 0:
            raise ConfigurationError(f"Sobolev order must be nonnegative, got {self.s}")


@dataclass
class WaveletSelection:
    """Kept wavelet indices as boolean masks per (octave, orientation) block."""

    system: WaveletSystem
    masks: dict  # (j, upsilon) -> (s, s) boolean array

    def flat_mask(self) -> np.ndarray:
        return np.concatenate([self.masks[b].ravel() for b in self.system.blocks])

    def count(self) -> int:
        return int(sum(m.sum() for m in self.masks.values()))

    def indices(self) -> list[WaveletIndex]:
        out = []
        for j, up in self.system.blocks:
            c = self.system.centers_of(j)
            for i1, i2 in zip(*np.nonzero(self.masks[(j, up)])):
                out.append(WaveletIndex(j=j, m=(c[i1], c[i2]), upsilon=up))
        return out


@dataclass
class ShearletSelection:
    """Kept lattice positions per channel, plus full-grid masks."""

    system: ShearletSystem
    masks: list  # per channel: (n, n) boolean (stride lattice & interior)

    def lattice_masks(self) -> list[np.ndarray]:
        out = []
        for ch, m in zip(self.system.channels, self.masks):
            out.append(m[:: ch.stride[0], :: ch.stride[1]])
        return out

    def count(self) -> int:
        return int(sum(m.sum() for m in self.masks))

    def indices(self) -> list[ShearletIndex]:
        out = []
        for ch, lat in zip(self.system.channels, self.lattice_masks()):
            for i1, i2 in zip(*np.nonzero(lat)):
                out.append(ShearletIndex(j=ch.j, k=ch.k, m=(int(i1), int(i2)), iota=ch.iota))
        return out


# a kept atom may leak at most this energy fraction outside the square
INTERIOR_LEAK_TOL = 1.0e-4


def select_interior_shearlets(shearlets: ShearletSystem,
                              domain: DigitalDomain) -> ShearletSelection:
    """Keep lattice translates with at least 1 - 1e-4 of their energy inside
    the square (atoms are box-supported, so near the boundary this is a
    no-wrap condition on the sheared support)."""
    if shearlets.domain.n != domain.n:
        raise ConfigurationError("shearlet system and domain grids differ")
    n = domain.n
    masks = []
    for ch, inside in zip(shearlets.channels, shearlets.interior_energy_fraction()):
        m = np.zeros((n, n), dtype=bool)
        lat = np.zeros((n, n), dtype=bool)
        lat[:: ch.stride[0], :: ch.stride[1]] = True
        m[lat & (inside >= 1.0 - INTERIOR_LEAK_TOL)] = True
        masks.append(m)
    return ShearletSelection(system=shearlets, masks=masks)


def select_boundary_wavelets(wavelets: WaveletSystem, domain: DigitalDomain,
                             config: HybridConfig, q_sh: float) -> WaveletSelection:
    """Keep wavelets whose support ball meets the scale-dependent tube."""
    if wavelets.domain.n != domain.n:
        raise ConfigurationError("wavelet system and domain grids differ")
    ball = wavelets.q_w0 + wavelets.q_w1
    masks = {}
    for j, up in wavelets.blocks:
        c = wavelets.centers_of(j)
        edge = np.minimum(c, 1.0 - c)
        d = np.minimum(edge[:, None], edge[None, :])
        thresh = 2.0 ** (-j) * ball + q_sh * 2.0 ** (-config.tau * (j - config.t))
        masks[(j, up)] = d < thresh
    return WaveletSelection(system=wavelets, masks=masks)


@dataclass
class HybridCoefficients:
    """Stacked coefficients over the selected wavelets then shearlets."""

    wavelet_part: np.ndarray
    shearlet_part: np.ndarray
    scale_of: np.ndarray

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.wavelet_part, self.shearlet_part])

    @property
    def size(self) -> int:
        return self.wavelet_part.size + self.shearlet_part.size

    def norm(self) -> float:
        return float(np.sqrt((self.wavelet_part**2).sum() + (self.shearlet_part**2).sum()))

    def weighted_norm(self, s: float) -> float:
        w = 2.0 ** (self.scale_of * s)
        return float(np.linalg.norm(w * self.stacked()))


class BoundaryShearletSystem:
    """Selected hybrid frame with matrix-free analysis/synthesis/frame ops."""

    def __init__(self, wavelets: WaveletSystem, shearlets: ShearletSystem,
                 config: HybridConfig):
        if wavelets.domain.n != shearlets.domain.n:
            raise ConfigurationError(
                f"wavelet grid {wavelets.domain.n} != shearlet grid {shearlets.domain.n}"
            )
        self.domain = wavelets.domain
        self.wavelets = wavelets
        self.shearlets = shearlets
        self.config = config
        self.q_w0 = wavelets.q_w0
        self.q_w1 = wavelets.q_w1
        self.q_sh = shearlets.q_sh
        self.wavelet_sel = select_boundary_wavelets(
            wavelets, self.domain, config, shearlets.q_sh
        )
        self.shearlet_sel = select_interior_shearlets(shearlets, self.domain)
        self._wmask_flat = self.wavelet_sel.flat_mask()
        self._wscales = wavelets.scale_vector()[self._wmask_flat]
        self._smask_lat = self.shearlet_sel.lattice_masks()
        sscales = []
        for ch, lat in zip(shearlets.channels, self._smask_lat):
            sscales.append(np.full(int(lat.sum()), ch.j, dtype=np.int64))
        self._sscales = (
            np.concatenate(sscales) if sscales else np.zeros(0, dtype=np.int64)
        )
        self.scale_of = np.concatenate([self._wscales, self._sscales])
        self.n_wavelet = int(self._wmask_flat.sum())
        self.n_shearlet = int(self._sscales.size)
        self.size = self.n_wavelet + self.n_shearlet
        # channels whose whole selection is empty never touch a coefficient:
        # keep them out of the FFT batches
        self._active = [
            c for c, lat in enumerate(self._smask_lat) if lat.any()
        ]
        if self._active:
            self._smask_stack = np.stack(
                [self.shearlet_sel.masks[c] for c in self._active]
            )
        else:
            self._smask_stack = None

    # -- spec-facing views ---------------------------------------------------

    @property
    def theta_sel(self) -> list[WaveletIndex]:
        return self.wavelet_sel.indices()

    @property
    def lambda0_sel(self) -> list[ShearletIndex]:
        return self.shearlet_sel.indices()

    # -- transforms ------------------------------------------------------------

    def analysis(self, f: np.ndarray) -> HybridCoefficients:
        n = self.domain.n
        f = np.asarray(f, dtype=float)
        if f.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} grid, got {f.shape}")
        wav = wavelet_analysis(self.wavelets, f)[self._wmask_flat]
        if self._active:
            stack = self.shearlets.coefficient_stack(f, idx=self._active)
            parts = []
            for row, c in enumerate(self._active):
                ch = self.shearlets.channels[c]
                parts.append(
                    stack[row][:: ch.stride[0], :: ch.stride[1]][self._smask_lat[c]]
                )
            sh = np.concatenate(parts)
        else:
            sh = np.zeros(0)
        return HybridCoefficients(wavelet_part=wav, shearlet_part=sh,
                                  scale_of=self.scale_of)

    def synthesis(self, c: HybridCoefficients) -> np.ndarray:
        n = self.domain.n
        if c.wavelet_part.size != self.n_wavelet or c.shearlet_part.size != self.n_shearlet:
            raise ValueError(
                f"coefficient sizes ({c.wavelet_part.size}, {c.shearlet_part.size}) do not "
                f"match selections ({self.n_wavelet}, {self.n_shearlet})"
            )
        wav_full = np.zeros(self.wavelets.size)
        wav_full[self._wmask_flat] = c.wavelet_part
        out = wavelet_synthesis(self.wavelets, wav_full)
        if self._active and self.n_shearlet:
            full = np.zeros((len(self._active), n, n))
            off = 0
            for row, ci in enumerate(self._active):
                ch = self.shearlets.channels[ci]
                lat = self._smask_lat[ci]
                cnt = int(lat.sum())
                block = np.zeros(lat.shape)
                block[lat] = c.shearlet_part[off : off + cnt]
                full[row][:: ch.stride[0], :: ch.stride[1]] = block
                off += cnt
            out += self.shearlets.adjoint_stack(full, idx=self._active)
        return out

    def frame_apply(self, f: np.ndarray) -> np.ndarray:
        """S f = synthesis(analysis(f)), fused with mask multiplies."""
        n = self.domain.n
        f = np.asarray(f, dtype=float)
        wav = wavelet_analysis(self.wavelets, f)
        wav[~self._wmask_flat] = 0.0
        out = wavelet_synthesis(self.wavelets, wav)
        if self._smask_stack is not None:
            stack = self.shearlets.coefficient_stack(f, idx=self._active)
            stack *= self._smask_stack
            out += self.shearlets.adjoint_stack(stack, idx=self._active)
        return out


def build_boundary_shearlet_system(wavelets: WaveletSystem, shearlets: ShearletSystem,
                                   config: HybridConfig) -> BoundaryShearletSystem:
    return BoundaryShearletSystem(wavelets, shearlets, config)


def analysis(bss: BoundaryShearletSystem, f: np.ndarray) -> HybridCoefficients:
    return bss.analysis(f)


def synthesis(bss: BoundaryShearletSystem, c: HybridCoefficients) -> np.ndarray:
    return bss.synthesis(c)


def frame_operator_apply(bss: BoundaryShearletSystem, f: np.ndarray) -> np.ndarray:
    return bss.frame_apply(f)


def sobolev_weights(bss: BoundaryShearletSystem, s: float) -> np.ndarray:
    """Diagonal weights 2**(j_n * s) over the stacked coefficient order."""
    if s < 0:
        raise ConfigurationError(f"Sobolev order must be nonnegative, got {s}")
    return 2.0 ** (bss.scale_of * s)


def rasterized_selection_mask(bss: BoundaryShearletSystem) -> BinaryMask:
    """Pixel mask marking centers of all kept wavelet atoms (debug/export aid)."""
    n = bss.domain.n
    bits = np.zeros((n, n), dtype=bool)
    for (j, up), m in bss.wavelet_sel.masks.items():
        s = m.shape[0]
        scale = n // s
        i1, i2 = np.nonzero(m)
        bits[i1 * scale + scale // 2, i2 * scale + scale // 2] = True
    return BinaryMask(domain=bss.domain, bits=bits, meaning="wavelet-select")
