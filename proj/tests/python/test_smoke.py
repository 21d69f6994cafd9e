"""Smoke tests of the python bindings against known values."""

import math

import pytest

rl = pytest.importorskip("renormlab")


def test_continued_fraction_convergents():
    g = rl.ContinuedFraction.golden()
    # Fibonacci convergents
    assert rl.convergent(g, 10) == (55, 89)
    phi_inv = (math.sqrt(5) - 1) / 2
    assert abs(rl.cf_value(g, 40) - phi_inv) < 1e-15

    s = rl.ContinuedFraction.silver()
    assert rl.convergent(s, 3) == (5, 12)

    terms, exhausted = rl.gauss_expand(phi_inv, 12)
    assert terms == [1] * 12
    assert not exhausted


def test_rotation_number_roundtrip():
    fam = rl.arnold_cubic()
    assert fam.name == "arnold-cubic"
    g = rl.ContinuedFraction.golden()
    f = fam.at(rl.tune_to_rotation(fam, g, 14))
    # past the tuning depth the combinatorics may lock onto the nearby
    # rational, so ask only for the accuracy the tuning supports
    rn = rl.rotation_number(f, tol=1e-8)
    assert rn.digits[:8] == [1] * 8
    phi_inv = (math.sqrt(5) - 1) / 2
    assert abs(rn.rho - phi_inv) < 1e-6


def test_partition_covers_the_circle():
    fam = rl.arnold_cubic()
    f = fam.at(rl.tune_to_rotation(fam, rl.ContinuedFraction.golden(), 14))
    pt = rl.partition(f, 7)
    # q_m + q_{m+1} atoms tiling the full circle
    assert len(pt.atoms) == pt.q_m + pt.q_m1
    assert abs(pt.total_length() - 1.0) < 1e-12
    bs = rl.bounds_stats(pt)
    assert bs.k_max >= bs.k_min >= 1.0
    assert sum(bs.hist) == len(pt.atoms)


def test_scaling_and_convergence():
    g = rl.ContinuedFraction.golden()
    fam1, fam2 = rl.arnold_cubic(), rl.two_harmonic(0.1)
    f1 = fam1.at(rl.tune_to_rotation(fam1, g, 16))
    sc = rl.scaling_ratios(f1, 10)
    assert 0.5 < sc.limit < 1.0

    f2 = fam2.at(rl.tune_to_rotation(fam2, g, 16))
    conv = rl.renorm_convergence(f1, f2, 8)
    assert not conv.exact_identity
    assert 0.0 < conv.mu < 1.0
    assert conv.d[8] < conv.d[2]

    same = rl.renorm_convergence(f1, f1, 6)
    assert same.exact_identity


def test_julia_raster_and_profile():
    fam = rl.arnold_cubic()
    f = fam.at(rl.tune_to_rotation(fam, rl.ContinuedFraction.golden(), 12))
    r = rl.julia_raster(f, 2, 256, 128)
    px = r.pixels
    assert px.shape == (256, 256)
    assert not r.degenerate
    # conjugation symmetry about the real axis
    assert (px == px[::-1, :]).all()

    deep = rl.julia_raster(f, 3, 512, 128)
    prof = rl.deep_point_profile(deep, [0.02 * 1.5**k for k in range(7)])
    assert len(prof.r) >= 3
    assert prof.beta == prof.slope - 1


def test_errors_surface_as_value_error():
    fam = rl.arnold_cubic()
    with pytest.raises(ValueError, match="geometry"):
        rl.partition(fam.at(0.0), 5)
    with pytest.raises(ValueError):
        rl.ContinuedFraction([0, 2])
