import numpy as np
import pytest

from bshear.errors import ConfigurationError
from bshear.geometry import (build_domain, distance_to_boundary,
                             tubular_region)


def test_build_512():
    dom = build_domain(512)
    assert dom.n == 512
    assert dom.pixel_size == 1.0 / 512
    assert dom.interior_mask.all()
    assert dom.pixel_size * dom.n == 1.0


def test_pixel_centers_n8():
    dom = build_domain(8)
    c1, c2 = dom.centers()
    assert c1[3] == 0.4375
    assert c1[0] == 0.0625


@pytest.mark.parametrize("n", [7, 6, 12, 100, 4])
def test_bad_grid_sizes(n):
    with pytest.raises(ConfigurationError):
        build_domain(n)


def test_distance_center_pixel():
    for n in (8, 32, 64):
        d = distance_to_boundary(build_domain(n)).d
        assert abs(d[n // 2, n // 2] - (0.5 - 1 / (2 * n))) < 1e-15


def test_distance_corner_pixel():
    d = distance_to_boundary(build_domain(8)).d
    assert abs(d[0, 0] - 1 / 16) < 1e-15


def _edge_samples(per_edge):
    u = np.linspace(0.0, 1.0, per_edge + 1)
    z = np.zeros_like(u)
    o = np.ones_like(u)
    return np.concatenate([
        np.stack([u, z], 1), np.stack([u, o], 1),
        np.stack([z, u], 1), np.stack([o, u], 1),
    ])


def test_distance_matches_dense_boundary_sampling():
    # two-tier oracle: a pure dense scan gives a one-sided bound with a
    # provable error, adding each center's four edge projections makes the
    # sampled minimum exact
    n = 32
    dom = build_domain(n)
    d = distance_to_boundary(dom).d
    c1, c2 = dom.centers()
    P = np.stack(np.meshgrid(c1, c2, indexing="ij"), -1).reshape(-1, 2)

    per_edge = 4096
    B = _edge_samples(per_edge)
    brute = np.full(len(P), np.inf)
    for start in range(0, len(B), 1024):
        chunk = B[start : start + 1024]
        dist = np.sqrt(((P[:, None, :] - chunk[None, :, :]) ** 2).sum(-1))
        brute = np.minimum(brute, dist.min(axis=1))
    brute = brute.reshape(n, n)
    spacing = 1.0 / per_edge
    bound = spacing**2 / (8 * d.min())
    assert (brute >= d - 1e-14).all()
    assert (brute <= d + bound).all()

    # augmented scan: include the orthogonal projection feet
    feet = []
    for p in P:
        feet += [(p[0], 0.0), (p[0], 1.0), (0.0, p[1]), (1.0, p[1])]
    feet = np.array(feet)
    exact = np.full(len(P), np.inf)
    allpts = np.concatenate([B, feet])
    for start in range(0, len(allpts), 2048):
        chunk = allpts[start : start + 2048]
        dist = np.sqrt(((P[:, None, :] - chunk[None, :, :]) ** 2).sum(-1))
        exact = np.minimum(exact, dist.min(axis=1))
    assert np.abs(exact.reshape(n, n) - d).max() < 1e-12


def test_distance_lipschitz_and_range():
    d = distance_to_boundary(build_domain(32)).d
    assert d.min() >= 0
    assert d.max() <= np.sqrt(2) / 2
    px = 1.0 / 32
    assert np.abs(np.diff(d, axis=0)).max() <= px + 1e-15
    assert np.abs(np.diff(d, axis=1)).max() <= px + 1e-15


def test_distance_dihedral_symmetry():
    d = distance_to_boundary(build_domain(64)).d
    for sym in (d[::-1, :], d[:, ::-1], d.T, d[::-1, ::-1].T):
        assert np.abs(d - sym).max() < 1e-12


def test_tubular_all_selected():
    m = tubular_region(build_domain(16), q_sh=2.0, r=0.0)
    assert m.bits.all()
    assert m.meaning == "tubular"


def test_tubular_matches_distance_oracle():
    dom = build_domain(32)
    d = distance_to_boundary(dom).d
    m = tubular_region(dom, q_sh=0.25, r=1.0)
    assert np.array_equal(m.bits, d < 0.125)
    assert m.bits.sum() > 0


def test_tubular_subpixel_empty():
    for n in (32, 1024):
        m = tubular_region(build_domain(n), q_sh=0.25, r=20.0)
        assert not m.bits.any()


def test_tubular_monotone_in_r():
    dom = build_domain(32)
    prev = None
    for r in (-1.0, 0.0, 0.7, 1.5, 3.0):
        bits = tubular_region(dom, 0.25, r).bits
        if prev is not None:
            assert (bits <= prev).all()
        prev = bits


def test_tubular_rejects_bad_q():
    with pytest.raises(ConfigurationError):
        tubular_region(build_domain(16), q_sh=0.0, r=1.0)
