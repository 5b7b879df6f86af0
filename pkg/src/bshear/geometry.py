"""Digitization of the unit square: pixel grid, boundary distances, tubular masks.

The domain is always [0, 1]^2, rasterized as an n-by-n grid with pixel centers
at ((i + 1/2)/n, (j + 1/2)/n).  No center ever lies exactly on the boundary,
so strict inequalities against distance thresholds are unambiguous.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class DigitalDomain:
    """n-by-n rasterization of the unit square."""

    n: int
    pixel_size: float
    interior_mask: np.ndarray

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Pixel-center coordinates as two 1-D arrays (axis 0, axis 1)."""
        c = (np.arange(self.n) + 0.5) * self.pixel_size
        return c, c


@dataclass(frozen=True)
class DistanceField:
    """Euclidean distance from each pixel center to the boundary of the square."""

    domain: DigitalDomain
    d: np.ndarray


@dataclass(frozen=True)
class BinaryMask:
    """Boolean pixel mask tagged with what it selects."""

    domain: DigitalDomain
    bits: np.ndarray
    meaning: str


def build_domain(n: int) -> DigitalDomain:
    """Rasterize [0,1]^2 as an n-by-n pixel grid.

    n must be a power of two and at least 8 (keeps every transform
    FFT- and dyadic-decomposition-friendly).
    """
    if n < 8 or (n & (n - 1)) != 0:
        raise ConfigurationError(f"grid size must be a power of two >= 8, got {n}")
    mask = np.ones((n, n), dtype=bool)
    mask.flags.writeable = False
    return DigitalDomain(n=n, pixel_size=1.0 / n, interior_mask=mask)


def distance_to_boundary(domain: DigitalDomain) -> DistanceField:
    """Exact distance from each pixel center to the edge of the unit square.

    For the square this is min(x1, 1-x1, x2, 1-x2) at every center.
    """
    c1, c2 = domain.centers()
    e1 = np.minimum(c1, 1.0 - c1)
    e2 = np.minimum(c2, 1.0 - c2)
    d = np.minimum(e1[:, None], e2[None, :])
    d.flags.writeable = False
    return DistanceField(domain=domain, d=d)


def tubular_region(domain: DigitalDomain, q_sh: float, r: float) -> BinaryMask:
    """Pixels closer than q_sh * 2**(-r) to the boundary.

    r may be any real; large r gives an empty mask, very negative r selects
    everything.
    """
    if q_sh <= 0:
        raise ConfigurationError(f"tube constant must be positive, got {q_sh}")
    field = distance_to_boundary(domain)
    bits = field.d < q_sh * 2.0 ** (-r)
    bits.flags.writeable = False
    return BinaryMask(domain=domain, bits=bits, meaning="tubular")
