import numpy as np
import pytest
from scipy.signal import fftconvolve

from bshear.errors import ConfigurationError
from bshear.geometry import build_domain, distance_to_boundary
from bshear.hybrid import (HybridCoefficients, HybridConfig, analysis,
                           build_boundary_shearlet_system,
                           frame_operator_apply, select_boundary_wavelets,
                           select_interior_shearlets, sobolev_weights,
                           synthesis)
from bshear.shearlet import build_shearlet_system
from bshear.wavelet import build_wavelet_system, wavelet_analysis

from conftest import area_norm

RNG = np.random.default_rng(3)


def test_interior_selection_center_kept_boundary_excluded(ss64, dom64):
    sel = select_interior_shearlets(ss64, dom64)
    ch_idx = next(i for i, ch in enumerate(ss64.channels)
                  if ch.j == 3 and ch.k == 0 and ch.iota == 1)
    m = sel.masks[ch_idx]
    assert m[32, 32]          # fine atom mid-domain is kept
    assert not m[0, :].any()  # centered on the boundary row: excluded
    assert not m[:, 0].any()


def test_interior_selection_matches_energy_oracle():
    # brute force on sampled lattice positions: place the atom without
    # wrapping and sum its in-square energy by direct indexing
    n = 128
    dom = build_domain(n)
    ss = build_shearlet_system(dom, 4, [1, 1, 2, 2])
    sel = select_interior_shearlets(ss, dom)
    off = np.arange(n)
    off[off >= n // 2] -= n  # signed support offsets of the base atom
    rng = np.random.default_rng(0)
    for ci in (0, 5, 20, 40, 56):
        ch = ss.channels[ci]
        atom2 = ss.base_atom(ch.j, ch.k, ch.iota) ** 2
        total = atom2.sum()
        i1s = np.arange(0, n, ch.stride[0])
        i2s = np.arange(0, n, ch.stride[1])
        picks = [(i1, i2) for i1 in i1s[:6] for i2 in i2s]
        picks += [(i1s[rng.integers(len(i1s))], i2s[rng.integers(len(i2s))])
                  for _ in range(200)]
        for i1, i2 in picks:
            ok1 = (0 <= i1 + off) & (i1 + off <= n - 1)
            ok2 = (0 <= i2 + off) & (i2 + off <= n - 1)
            inside = atom2[np.ix_(ok1, ok2)].sum()
            assert sel.masks[ci][i1, i2] == (inside >= (1 - 1e-4) * total)


def test_boundary_wavelet_selection_all_kept_when_tube_covers(ws64, dom64):
    cfg = HybridConfig(t=40.0)
    sel = select_boundary_wavelets(ws64, dom64, cfg, q_sh=1.0)
    assert sel.count() == ws64.size


def test_threshold_arithmetic_example():
    # with q_w0 + q_w1 = 1, q_sh = 1/4: threshold at j=6, t=0, tau=1/3
    thresh = 2.0**-6 + 0.25 * 2.0 ** (-(1.0 / 3.0) * 6)
    assert abs(thresh - 0.078125) < 1e-12


def test_boundary_selection_matches_distance_oracle(ws64, dom64, ss64):
    cfg = HybridConfig(t=1.0)
    sel = select_boundary_wavelets(ws64, dom64, cfg, q_sh=ss64.q_sh)
    ball = ws64.q_w0 + ws64.q_w1
    for (j, up), mask in sel.masks.items():
        c = ws64.centers_of(j)
        edge = np.minimum(c, 1 - c)
        d = np.minimum(edge[:, None], edge[None, :])
        thresh = 2.0**-j * ball + ss64.q_sh * 2.0 ** (-cfg.tau * (j - cfg.t))
        assert np.array_equal(mask, d < thresh)


def test_offset_monotonicity(ws64, dom64, ss64):
    prev = None
    for t in (-6.0, -2.0, 1.0, 3.0, 5.0):
        sel = select_boundary_wavelets(ws64, dom64, HybridConfig(t=t), ss64.q_sh)
        flat = sel.flat_mask()
        if prev is not None:
            assert (prev <= flat).all()
        prev = flat


def test_subpixel_tube_keeps_ball_collar(ws64, dom64):
    # tube far below pixel size: the kept set degenerates to atoms whose
    # support ball reaches the boundary
    cfg = HybridConfig(t=-200.0)
    sel = select_boundary_wavelets(ws64, dom64, cfg, q_sh=0.25)
    ball = ws64.q_w0 + ws64.q_w1
    for (j, up), mask in sel.masks.items():
        c = ws64.centers_of(j)
        edge = np.minimum(c, 1 - c)
        d = np.minimum(edge[:, None], edge[None, :])
        assert np.array_equal(mask, d < 2.0**-j * ball + 2e-23)
        assert mask.any()
    # at the finest scale only the edge-adjacent collar survives
    fine = max(j for j, _ in sel.masks)
    assert not sel.masks[(fine, 1)].all()


def test_build_rejects_domain_mismatch(ws32):
    ss = build_shearlet_system(build_domain(64), 3, [1, 1, 2])
    with pytest.raises(ConfigurationError):
        build_boundary_shearlet_system(ws32, ss, HybridConfig(t=1.0))


def test_config_validation():
    with pytest.raises(ConfigurationError):
        HybridConfig(t=1.0, tau=0.0)
    with pytest.raises(ConfigurationError):
        HybridConfig(t=1.0, s=-1.0)


def test_selected_shearlets_leak_at_most_tolerance(bss64):
    # every kept atom keeps >= 1 - 1e-4 of its energy inside the square;
    # leak computed by direct signed-offset summation
    n = 64
    off = np.arange(n)
    off[off >= n // 2] -= n
    lat = bss64.shearlet_sel.lattice_masks()
    checked = 0
    for ci, ch in enumerate(bss64.shearlets.channels):
        pos = np.argwhere(lat[ci])
        if not len(pos):
            continue
        atom2 = bss64.shearlets.base_atom(ch.j, ch.k, ch.iota) ** 2
        for i1, i2 in pos[:: max(1, len(pos) // 3)]:
            m = (i1 * ch.stride[0], i2 * ch.stride[1])
            ok1 = (m[0] + off >= 0) & (m[0] + off <= n - 1)
            ok2 = (m[1] + off >= 0) & (m[1] + off <= n - 1)
            inside = atom2[np.ix_(ok1, ok2)].sum()
            assert inside >= (1 - 1e-4) * atom2.sum()
            checked += 1
    assert checked > 20


def test_nonempty_parts_at_plateau(bss64):
    assert bss64.n_wavelet > 0
    assert bss64.n_shearlet > 0
    assert bss64.size == bss64.n_wavelet + bss64.n_shearlet
    assert bss64.scale_of.size == bss64.size


@pytest.mark.slow
def test_paper_scale_build_512():
    dom = build_domain(512)
    ws = build_wavelet_system(dom, "db2", 5)
    ss = build_shearlet_system(dom, 5, [1, 1, 2, 2, 3])
    bss = build_boundary_shearlet_system(ws, ss, HybridConfig(t=7.31))
    assert bss.n_wavelet > 0 and bss.n_shearlet > 0


def test_degenerate_wavelet_only_system(ws32):
    ss_empty = build_shearlet_system(build_domain(32), 0)
    bss = build_boundary_shearlet_system(ws32, ss_empty, HybridConfig(t=50.0))
    f = RNG.standard_normal((32, 32))
    c = bss.analysis(f)
    assert c.shearlet_part.size == 0
    assert np.allclose(c.wavelet_part, wavelet_analysis(ws32, f))


def test_zero_function(bss32):
    c = analysis(bss32, np.zeros((32, 32)))
    assert np.all(c.stacked() == 0)
    assert np.all(synthesis(bss32, c) == 0)


def test_adjoint_dot_100(bss32):
    for _ in range(100):
        f = RNG.standard_normal((32, 32))
        c = analysis(bss32, f)
        y = HybridCoefficients(RNG.standard_normal(bss32.n_wavelet),
                               RNG.standard_normal(bss32.n_shearlet),
                               bss32.scale_of)
        lhs = float(np.dot(c.wavelet_part, y.wavelet_part)
                    + np.dot(c.shearlet_part, y.shearlet_part))
        rhs = float((f * synthesis(bss32, y)).sum() / 32**2)
        scale = area_norm(f) * y.norm()
        assert abs(lhs - rhs) <= 1e-10 * scale


def dense_stack_matrix(bss):
    n = bss.domain.n
    cols = []
    for i in range(n * n):
        e = np.zeros(n * n)
        e[i] = 1.0
        cols.append(bss.analysis(e.reshape(n, n)).stacked())
    return np.column_stack(cols)


def test_dense_operator_oracle(bss32):
    T = dense_stack_matrix(bss32)
    f = RNG.standard_normal((32, 32))
    assert np.abs(bss32.analysis(f).stacked() - T @ f.ravel()).max() < 1e-10
    y = RNG.standard_normal(bss32.size)
    yc = HybridCoefficients(y[: bss32.n_wavelet], y[bss32.n_wavelet :],
                            bss32.scale_of)
    # adjoint with the area weighting: synthesis = n^2 T^T
    assert np.abs(synthesis(bss32, yc).ravel() - 32**2 * (T.T @ y)).max() < 1e-8
    Sf = frame_operator_apply(bss32, f)
    assert np.abs(Sf.ravel() - 32**2 * (T.T @ (T @ f.ravel()))).max() < 1e-8


def test_frame_operator_identities(bss32):
    f = RNG.standard_normal((32, 32))
    g = RNG.standard_normal((32, 32))
    Sf = frame_operator_apply(bss32, f)
    c = analysis(bss32, f)
    assert abs((Sf * f).sum() / 32**2 - c.norm() ** 2) <= 1e-10 * c.norm() ** 2
    lhs = (Sf * g).sum()
    rhs = (f * frame_operator_apply(bss32, g)).sum()
    assert abs(lhs - rhs) <= 1e-10 * abs(lhs)


def test_frame_inequality_random_probes(bss32):
    from bshear.experiments import frame_operator_handle
    from bshear.linalg import extremal_eigenvalues

    est = extremal_eigenvalues(frame_operator_handle(bss32), tol=1e-6)
    assert not est.lambda_min_below_threshold
    for _ in range(200):
        f = RNG.standard_normal((32, 32))
        e = analysis(bss32, f).norm() ** 2 / area_norm(f) ** 2
        assert est.lambda_min * (1 - 1e-6) - 1e-9 <= e
        assert e <= est.lambda_max * (1 + 1e-6) + 1e-9


def test_sobolev_weights(bss64):
    w0 = sobolev_weights(bss64, 0.0)
    assert np.all(w0 == 1.0)
    w1 = sobolev_weights(bss64, 1.0)
    sh_scales = bss64.scale_of[bss64.n_wavelet :]
    assert np.any(sh_scales == 3)
    assert np.all(w1[bss64.n_wavelet :][sh_scales == 3] == 8.0)
    # weighted norm identity
    f = RNG.standard_normal((64, 64))
    c = analysis(bss64, f)
    assert abs(c.weighted_norm(1.0)
               - np.linalg.norm(w1 * c.stacked())) < 1e-12
    with pytest.raises(ConfigurationError):
        sobolev_weights(bss64, -0.5)


def test_size_mismatch_rejected(bss32):
    with pytest.raises(ValueError):
        synthesis(bss32, HybridCoefficients(np.zeros(3), np.zeros(4),
                                            np.zeros(7)))
    with pytest.raises(ValueError):
        analysis(bss32, np.zeros((16, 16)))
