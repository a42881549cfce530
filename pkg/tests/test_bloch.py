import numpy as np
import pytest

from edgetopo import (GapClosedError, ModelError, band_projection, bloch_field,
                      bloch_hamiltonian, build_harper, build_square_laplacian, chern_number,
                      chern_z2, spin_chern_numbers, spin_spectrum_clusters)
from edgetopo.bloch import write_bands_csv


def fd_chern(model, bands, n=96, h=1e-5):
    """(i/2pi) int tr P [d1 P, d2 P] by central differences on a midpoint grid."""
    def proj(k):
        w, v = np.linalg.eigh(bloch_hamiltonian(model, k))
        f = v[:, list(bands)]
        return f @ f.conj().T

    ks = -np.pi + 2 * np.pi * (np.arange(n) + 0.5) / n
    total = 0.0
    for a in ks:
        for b in ks:
            p = proj((a, b))
            d1 = (proj((a + h, b)) - proj((a - h, b))) / (2 * h)
            d2 = (proj((a, b + h)) - proj((a, b - h))) / (2 * h)
            total += np.trace(p @ (d1 @ d2 - d2 @ d1))
    return (1j * total * (2 * np.pi / n) ** 2 / (2 * np.pi)).real


def test_bands_shape_and_order(harper):
    fld = bloch_field(harper, 8, 6)
    assert fld.bands.shape == (8, 6, 7)
    assert np.all(np.diff(fld.bands, axis=-1) >= -1e-12)


def test_bloch_field_threads_agree(harper):
    a = bloch_field(harper, 12, workers=1)
    b = bloch_field(harper, 12, workers=4)
    np.testing.assert_array_equal(a.bands, b.bands)


@pytest.mark.parametrize("band, expected", [(0, -2), (1, 5)])
def test_harper_chern_numbers(harper, band, expected):
    for n in (48, 96):
        assert chern_number(band_projection(bloch_field(harper, n), bands=[band])) == expected


@pytest.mark.parametrize("band", [0, 1])
def test_link_method_matches_finite_difference_oracle(harper, band):
    ch, raw = chern_number(band_projection(bloch_field(harper, 48), bands=[band]),
                           return_raw=True)
    fd = fd_chern(harper, [band], n=64)
    assert abs(fd - ch) < 0.05


def test_total_chern_number_vanishes(harper):
    assert chern_number(band_projection(bloch_field(harper, 24), bands=range(7))) == 0


def test_chern_number_gauge_invariant(harper, rng):
    fld = bloch_field(harper, 32)
    proj = band_projection(fld, bands=[1])
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, proj.frames.shape[:2] + (1, 1)))
    twisted = type(proj)(fld, proj.frames * phases, proj.band_window, proj.min_gap)
    assert chern_number(twisted) == chern_number(proj)


def test_window_and_index_selection_agree(harper):
    fld = bloch_field(harper, 24)
    assert chern_number(band_projection(fld, window=(-4, -2.4))) == \
        chern_number(band_projection(fld, bands=[0]))


def test_window_through_band_raises(harper):
    with pytest.raises(GapClosedError):
        band_projection(bloch_field(harper, 24), window=(-4, -2.57))


def test_gap_closing_raises():
    fld = bloch_field(build_square_laplacian(1.0), 8)
    assert fld.bands.shape[-1] == 1
    with pytest.raises(ValueError):
        band_projection(fld, bands=[1])


def test_kane_mele_bulk_invariants(kane_mele, kane_mele_nr):
    proj = band_projection(bloch_field(kane_mele, 24), window=(-10, 0.0))
    assert chern_number(proj) == 0
    assert chern_z2(proj) == 1
    assert chern_z2(proj, flip=True) == 1
    assert [c.label for c in spin_spectrum_clusters(proj)] == [-0.5, 0.5]
    proj_nr = band_projection(bloch_field(kane_mele_nr, 24), window=(-10, 0.0))
    assert spin_chern_numbers(proj_nr) == [-1, 1]


def test_chern_z2_needs_time_reversal(harper):
    with pytest.raises(ModelError):
        chern_z2(band_projection(bloch_field(harper, 8), bands=[0]))


def test_bands_csv(harper, tmp_path):
    path = tmp_path / "b.csv"
    write_bands_csv(bloch_field(harper, 4), path)
    lines = path.read_text().splitlines()
    assert lines[0] == "k1,k2," + ",".join(f"E_{n}" for n in range(1, 8))
    assert len(lines) == 17
