import numpy as np
import pytest

from bshear.errors import ConfigurationError
from bshear.geometry import build_domain
from bshear.shearlet import (GENERATORS, ShearletCoefficients, ShearletIndex,
                             build_shearlet_system, default_ladder,
                             shear_count, shearlet_analysis, shearlet_atom,
                             shearlet_synthesis)

from conftest import area_norm

RNG = np.random.default_rng(7)


def test_shear_count_values():
    assert shear_count(0) == 3
    assert shear_count(2) == 5
    assert shear_count(3) == 7
    with pytest.raises(ValueError):
        shear_count(-1)


def test_default_ladder():
    assert default_ladder(4) == [1, 1, 2, 2]
    assert default_ladder(5) == [1, 1, 2, 2, 3]
    assert default_ladder(6) == [1, 1, 2, 2, 3, 3]


@pytest.mark.slow
def test_paper_scale_configs_build():
    ss = build_shearlet_system(build_domain(256), 4, [1, 1, 2, 2])
    per_scale = {}
    for ch in ss.channels:
        if ch.iota != 0:
            per_scale.setdefault((ch.j, ch.iota), 0)
            per_scale[(ch.j, ch.iota)] += 1
    for j, kappa in enumerate([1, 1, 2, 2]):
        assert per_scale[(j, 1)] == 2 * 2**kappa + 1
        assert per_scale[(j, -1)] == 2 * 2**kappa + 1
    expect = 1 + sum(2 * (2 * 2**k + 1) for k in [1, 1, 2, 2])
    assert len(ss.channels) == expect


def test_filter_count_formula(ss32):
    expect = 1 + sum(2 * (2 * 2**k + 1) for k in ss32.shears_per_scale)
    assert len(ss32.channels) == expect


def test_frame_symbol_bounds(ss32):
    sym = ss32.frame_symbol()
    assert sym.min() > 0
    assert sym.max() / sym.min() < 1e3


@pytest.mark.slow
def test_frame_symbol_bounds_256():
    ss = build_shearlet_system(build_domain(256), 4, [1, 1, 2, 2])
    sym = ss.frame_symbol()
    assert sym.min() > 0
    assert sym.max() / sym.min() < 1e3


def test_atom_norms_and_exact_support(ss32):
    n = 32
    d = np.minimum(np.arange(n), n - np.arange(n))
    for ch in ss32.channels:
        atom = ss32.base_atom(ch.j, ch.k, ch.iota)
        assert abs(area_norm(atom) - 1.0) <= 1e-10
        out1 = np.abs(atom[d > ch.box_r[0], :]).max() if (d > ch.box_r[0]).any() else 0
        out2 = np.abs(atom[:, d > ch.box_r[1]]).max() if (d > ch.box_r[1]).any() else 0
        assert max(out1, out2) < 1e-12


def test_support_inside_scaled_ball(ss32):
    # digital rendering of the support condition: all energy of the k=0
    # directional atoms lies inside the ball of radius 2^(-j/2) q_sh / 2
    n = 32
    d = np.minimum(np.arange(n), n - np.arange(n)).astype(float)
    r2 = d[:, None] ** 2 + d[None, :] ** 2
    for ch in ss32.channels:
        if ch.iota == 0 or ch.k != 0:
            continue
        atom = ss32.base_atom(ch.j, ch.k, ch.iota)
        radius_px = 2.0 ** (-ch.j / 2.0) * ss32.q_sh / 2.0 * n
        outside = (atom**2)[r2 > radius_px**2].sum() / (atom**2).sum()
        assert outside <= 1e-4


def test_adjoint_dot_tests(ss32):
    n = 32
    for subsampled in (False, True):
        for _ in range(100):
            f = RNG.standard_normal((n, n))
            C = shearlet_analysis(ss32, f, subsampled=subsampled)
            Z = [RNG.standard_normal(a.shape) for a in C.arrays]
            Zc = ShearletCoefficients(ss32, Z, subsampled)
            lhs = sum(float((a * b).sum()) for a, b in zip(C.arrays, Z))
            rhs = float((f * shearlet_synthesis(ss32, Zc)).sum() / n**2)
            scale = area_norm(f) * np.sqrt(sum((z**2).sum() for z in Z))
            assert abs(lhs - rhs) <= 1e-10 * scale


def test_zero_function_and_zero_stack(ss32):
    C = shearlet_analysis(ss32, np.zeros((32, 32)))
    assert all(np.all(a == 0) for a in C.arrays)
    Z = ShearletCoefficients.zeros(ss32, subsampled=False)
    assert np.all(shearlet_synthesis(ss32, Z) == 0)


def test_frame_identity_in_frequency(ss32):
    # synthesis(analysis(f)) is diagonal in frequency with the stack symbol
    n = 32
    f = RNG.standard_normal((n, n))
    g = shearlet_synthesis(ss32, shearlet_analysis(ss32, f))
    sym = ss32.frame_symbol()
    lhs = np.fft.fft2(g)
    rhs = np.fft.fft2(f) * sym
    assert np.abs(lhs - rhs).max() <= 1e-10 * np.abs(rhs).max()


def test_single_coefficient_gives_translated_atom(ss32):
    Z = ShearletCoefficients.zeros(ss32, subsampled=False)
    ci = 5
    Z.arrays[ci][10, 7] = 1.0
    g = shearlet_synthesis(ss32, Z)
    ch = ss32.channels[ci]
    atom = np.roll(ss32.base_atom(ch.j, ch.k, ch.iota), (10, 7), axis=(0, 1))
    assert np.abs(g - atom).max() < 1e-12


def test_self_coefficient_and_crosstalk(ss32):
    ch = ss32.channels[8]
    idx = ShearletIndex(j=ch.j, k=ch.k, m=(3, 2), iota=ch.iota)
    atom = shearlet_atom(ss32, idx)
    assert abs(area_norm(atom) - 1.0) < 1e-10
    C = shearlet_analysis(ss32, atom)
    own = C.arrays[8][3 * ch.stride[0], 2 * ch.stride[1]]
    assert abs(own - 1.0) <= 1e-10
    crosstalk = max(
        np.abs(a).max() for i, a in enumerate(C.arrays) if i != 8
    )
    assert crosstalk < 1.0  # frame, not orthonormal: bounded, reported


def test_parabolic_box_scaling():
    ss = build_shearlet_system(build_domain(128), 4, [1, 1, 2, 2])
    widths = {ch.j: ch.box_r for ch in ss.channels if ch.iota == 1 and ch.k == 0}
    for j in range(3):
        narrow_ratio = widths[j][0] / widths[j + 1][0]
        wide_ratio = widths[j][1] / widths[j + 1][1]
        assert 1.0 <= narrow_ratio <= 4.0     # ~2 per scale
        assert 1.0 <= wide_ratio <= 2.83      # ~sqrt(2) per scale
    # lowpass atom is isotropic
    low = ss.channel(0, 0, 0)
    assert 0.8 <= low.box_r[0] / low.box_r[1] <= 1.25


def test_anisotropy_at_scale():
    # the long/short ratio of a fine-scale atom follows the parabolic law
    # within a factor two
    ss = build_shearlet_system(build_domain(128), 5, [1, 1, 2, 2, 3])
    ch = ss.channel(4, 0, 1)
    ratio = ch.box_r[1] / ch.box_r[0]
    assert 2.0 <= ratio <= 8.0  # 2^(j/2) = 4 within factor 2


def test_subsampled_lattice_shapes(ss32):
    C = shearlet_analysis(ss32, RNG.standard_normal((32, 32)), subsampled=True)
    for ch, a in zip(ss32.channels, C.arrays):
        assert a.shape == ch.lattice_shape
    # finest scale is unsubsampled per the stride ladder
    fine = [ch for ch in ss32.channels if ch.iota != 0 and ch.j == 2]
    assert all(ch.stride == (1, 1) for ch in fine)


def test_configuration_errors():
    dom = build_domain(32)
    with pytest.raises(ConfigurationError):
        build_shearlet_system(dom, 9)
    with pytest.raises(ConfigurationError):
        build_shearlet_system(dom, 3, [1, 1])
    with pytest.raises(ConfigurationError):
        build_shearlet_system(dom, 3, [1, 1, 2], generator="nosuch")
    with pytest.raises(ValueError):
        ss = build_shearlet_system(dom, 2, [1, 1])
        ss.channel(5, 0, 1)


def test_shape_mismatch(ss32):
    with pytest.raises(ValueError):
        shearlet_analysis(ss32, np.zeros((16, 16)))
    bad = ShearletCoefficients(ss32, [np.zeros((32, 32))] * 2, False)
    with pytest.raises(ValueError):
        shearlet_synthesis(ss32, bad)


def test_empty_system():
    ss = build_shearlet_system(build_domain(32), 0)
    assert ss.channels == []
    C = shearlet_analysis(ss, np.ones((32, 32)))
    assert C.flatten().size == 0
    assert np.all(shearlet_synthesis(ss, C) == 0)


def test_generator_metadata(ss32):
    assert set(ss32.generator_meta) == {"alpha_sh", "beta_sh"}
    assert ss32.generator in GENERATORS


def test_qmf_generator_variant():
    # alternative radial windows from iterated orthonormal filters: exact
    # dyadic partition, box-spline shear windows
    ss = build_shearlet_system(build_domain(32), 3, [1, 1, 1],
                               generator="qmf-db2")
    sym = ss.frame_symbol()
    assert sym.min() > 0
    assert sym.max() / sym.min() < 1e3
    f = RNG.standard_normal((32, 32))
    C = shearlet_analysis(ss, f)
    Z = [RNG.standard_normal(a.shape) for a in C.arrays]
    lhs = sum(float((a * b).sum()) for a, b in zip(C.arrays, Z))
    rhs = float((f * shearlet_synthesis(
        ss, ShearletCoefficients(ss, Z, False))).sum() / 32**2)
    assert abs(lhs - rhs) <= 1e-10 * np.sqrt(sum((z**2).sum() for z in Z))


def test_custom_strides_validated():
    dom = build_domain(32)
    ss = build_shearlet_system(dom, 2, [1, 1], strides=((8, 4), (2, 4)))
    assert ss.channel(0, 0, 1).stride == (8, 4)
    assert ss.channel(1, 0, -1).stride == (4, 2)  # swapped for the other cone
    assert ss.channel(0, 0, 0).stride == (4, 4)   # lowpass: min of scale 0
    with pytest.raises(ConfigurationError):
        build_shearlet_system(dom, 2, [1, 1], strides=((8, 4),))
    with pytest.raises(ConfigurationError):
        build_shearlet_system(dom, 2, [1, 1], strides=((3, 4), (2, 4)))
