"""Piecewise-smooth test images: a smooth background plus a second smooth
profile switched on inside a star-shaped region whose boundary curve may
leave the square (crossing its edge transversely).

Specs are plain numbers, so rasterization is bit-deterministic in
(spec, grid size).  Curvature and transversality are checked by dense
sampling of the region curve when a spec is validated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import ConfigurationError
from .geometry import DigitalDomain

MIN_CROSSING_ANGLE_DEG = 5.0
_CURVE_SAMPLES = 8192


@dataclass(frozen=True)
class CartoonSpec:
    """Parameters of one cartoon: f1 + indicator(D) * f2 on the square.

    f1/f2 are sums of plane-wave terms (amp, k1, k2, phase); the region D is
    star-shaped around `center` with radius r(theta) = radial_coeffs[0]
    + sum_k (a_k cos k theta + b_k sin k theta).
    """

    nu: float
    seed: int
    center: tuple[float, float]
    radial_coeffs: tuple[float, ...]
    f1_terms: tuple[tuple[float, int, int, float], ...]
    f2_terms: tuple[tuple[float, int, int, float], ...]
    boundary_crossings: int = 0
    max_curvature: float = 0.0
    min_crossing_angle_deg: float = 90.0


def _radius(spec: CartoonSpec, theta: np.ndarray):
    c = spec.radial_coeffs
    r = np.full_like(theta, c[0])
    dr = np.zeros_like(theta)
    ddr = np.zeros_like(theta)
    n_harm = (len(c) - 1) // 2
    for k in range(1, n_harm + 1):
        a, b = c[2 * k - 1], c[2 * k]
        ck, sk = np.cos(k * theta), np.sin(k * theta)
        r += a * ck + b * sk
        dr += k * (-a * sk + b * ck)
        ddr += k * k * (-a * ck - b * sk)
    return r, dr, ddr


def _eval_terms(terms, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    out = np.zeros(np.broadcast(x1, x2).shape)
    for amp, k1, k2, phase in terms:
        out += amp * np.cos(2 * np.pi * (k1 * x1 + k2 * x2) + phase)
    return out


def _c2_bound(terms) -> float:
    return sum(
        abs(a) * max(1.0, (2 * np.pi) ** 2 * (k1 * k1 + k2 * k2)) for a, k1, k2, _ in terms
    )


def validate_spec(spec: CartoonSpec) -> CartoonSpec:
    """Check curvature and transversality by dense sampling; returns the spec
    with the measured quantities filled in."""
    theta = np.linspace(0.0, 2 * np.pi, _CURVE_SAMPLES, endpoint=False)
    r, dr, ddr = _radius(spec, theta)
    if (r <= 0).any():
        raise ConfigurationError("region radius must stay positive")
    denom = (r * r + dr * dr) ** 1.5
    kappa = np.abs(r * r + 2 * dr * dr - r * ddr) / denom
    max_k = float(kappa.max())
    if max_k > spec.nu:
        raise ConfigurationError(
            f"curvature {max_k:.2f} exceeds the allowed bound {spec.nu:.2f}"
        )
    # boundary crossings and their angles
    cx, cy = spec.center
    p1 = cx + r * np.cos(theta)
    p2 = cy + r * np.sin(theta)
    inside = (p1 > 0) & (p1 < 1) & (p2 > 0) & (p2 < 1)
    flips = np.nonzero(inside != np.roll(inside, -1))[0]
    min_angle = 90.0
    for i in flips:
        # tangent of the curve at the flip
        t1 = dr[i] * np.cos(theta[i]) - r[i] * np.sin(theta[i])
        t2 = dr[i] * np.sin(theta[i]) + r[i] * np.cos(theta[i])
        # nearest edge is vertical or horizontal
        q1, q2 = p1[i], p2[i]
        edge_vertical = min(q1, 1 - q1) < min(q2, 1 - q2)
        edge_dir = (0.0, 1.0) if edge_vertical else (1.0, 0.0)
        cosang = abs(t1 * edge_dir[0] + t2 * edge_dir[1]) / math.hypot(t1, t2)
        ang = math.degrees(math.acos(min(1.0, cosang)))
        min_angle = min(min_angle, ang)
    if len(flips) and min_angle < MIN_CROSSING_ANGLE_DEG:
        raise ConfigurationError(
            f"discontinuity curve meets the boundary at {min_angle:.1f} deg "
            f"(needs >= {MIN_CROSSING_ANGLE_DEG})"
        )
    if _c2_bound(spec.f1_terms) > 1.0 + 1e-9 or _c2_bound(spec.f2_terms) > 1.0 + 1e-9:
        raise ConfigurationError("smooth profiles exceed the C2 bound")
    return CartoonSpec(
        nu=spec.nu, seed=spec.seed, center=spec.center,
        radial_coeffs=spec.radial_coeffs, f1_terms=spec.f1_terms,
        f2_terms=spec.f2_terms, boundary_crossings=int(len(flips)),
        max_curvature=max_k, min_crossing_angle_deg=min_angle,
    )


def disk_spec(radius: float = 0.25, center=(0.5, 0.5), height: float = 1.0,
              nu: float | None = None) -> CartoonSpec:
    """Indicator of a disk scaled by `height` (f1 = 0)."""
    f2 = ((height, 0, 0, 0.0),)
    return validate_spec(CartoonSpec(
        nu=nu if nu is not None else 1.5 / radius, seed=0, center=center,
        radial_coeffs=(radius,), f1_terms=(), f2_terms=f2,
    ))


def random_cartoon_spec(seed: int, nu: float = 12.0, crossing: bool = False,
                        max_attempts: int = 200) -> CartoonSpec:
    """Seeded rejection sampler for a valid spec.

    With crossing=True the star is pushed off-center until its boundary curve
    leaves the square (at least two transversal edge crossings).
    """
    rng = np.random.default_rng(seed)
    for _ in range(max_attempts):
        r0 = rng.uniform(0.18, 0.30)
        n_harm = 3
        coeffs = [r0]
        for k in range(1, n_harm + 1):
            scale = 0.05 * r0 / k**2
            coeffs += [rng.uniform(-scale, scale), rng.uniform(-scale, scale)]
        if crossing:
            center = (rng.uniform(0.35, 0.65), rng.uniform(-0.05, 0.12) + r0 * 0.4)
        else:
            lim = r0 * 1.3
            center = (rng.uniform(lim, 1 - lim), rng.uniform(lim, 1 - lim))
        f1_amp = 0.25 / max(1.0, (2 * np.pi) ** 2 * 2)
        f1 = ((f1_amp, 1, 1, rng.uniform(0, 2 * np.pi)),)
        f2 = ((0.9, 0, 0, 0.0),)
        try:
            spec = validate_spec(CartoonSpec(
                nu=nu, seed=seed, center=center, radial_coeffs=tuple(coeffs),
                f1_terms=f1, f2_terms=f2,
            ))
        except ConfigurationError:
            continue
        if crossing and spec.boundary_crossings < 2:
            continue
        if not crossing and spec.boundary_crossings != 0:
            continue
        return spec
    raise ConfigurationError(f"no valid cartoon found for seed {seed}")


def rasterize_cartoon(spec: CartoonSpec, domain: DigitalDomain) -> np.ndarray:
    """Pixel-center samples of f1 + indicator(D) f2, deterministic in (spec, n)."""
    spec = validate_spec(spec)
    n = domain.n
    c1, c2 = domain.centers()
    x1 = c1[:, None]
    x2 = c2[None, :]
    g = _eval_terms(spec.f1_terms, x1, x2)
    dx = x1 - spec.center[0]
    dy = x2 - spec.center[1]
    theta = np.arctan2(dy, dx)
    r, _, _ = _radius(spec, theta)
    inside = np.hypot(dx, dy) < r
    if spec.f2_terms:
        g = g + inside * _eval_terms(spec.f2_terms, x1, x2)
    return g


def reference_smoothness_report(g: np.ndarray) -> dict:
    """Sanity metrics: co-area mass of the sharpened gradient (equals the
    jump-set length for unit-height jumps) and a plain total-variation proxy."""
    if not np.isfinite(g).all():
        raise ValueError("grid contains non-finite values")
    n = g.shape[0]
    gs = gaussian_filter(g, 1.0, mode="nearest")
    gx, gy = np.gradient(gs, 1.0 / n)
    gm = np.hypot(gx, gy)
    tv = float(gm.sum() / n**2)
    thresh = 0.1 * gm.max() if gm.max() > 0 else 0.0
    jump_mass = float(gm[gm > thresh].sum() / n**2) if thresh > 0 else 0.0
    smooth_scale = float(np.percentile(gm, 75))
    if gm.max() <= 20.0 * max(smooth_scale, 1e-12):
        jump_mass = 0.0  # no sharp edge present, only smooth variation
    return {
        "jump_length": jump_mass,
        "tv_proxy": tv,
        "max_gradient": float(gm.max()),
    }


def region_arclength(spec: CartoonSpec, inside_only: bool = True) -> float:
    """Dense-sampling arclength of the region curve (clipped to the square)."""
    theta = np.linspace(0.0, 2 * np.pi, _CURVE_SAMPLES, endpoint=False)
    r, dr, _ = _radius(spec, theta)
    ds = np.sqrt(r * r + dr * dr) * (2 * np.pi / _CURVE_SAMPLES)
    if inside_only:
        p1 = spec.center[0] + r * np.cos(theta)
        p2 = spec.center[1] + r * np.sin(theta)
        keep = (p1 > 0) & (p1 < 1) & (p2 > 0) & (p2 < 1)
        ds = ds[keep]
    return float(ds.sum())
