import numpy as np
import pytest

from edgetopo import (GapClosedError, GapDescriptor, ModelError, build_kane_mele,
                      build_spin_orbit_square, build_square_laplacian, bulk_edge_check,
                      edge_bands, edge_current, edge_index, edge_z2_index, make_gap,
                      maslov_crossings, spin_edge_indices)
from edgetopo.edge import (bulk_gap, crossing_slopes, edge_energies, invariant_report,
                           validate_gap, winding_samples, write_edge_bands_csv)
from edgetopo.transfer import edge_unitary


def test_gap_descriptor_validation():
    with pytest.raises(ValueError):
        GapDescriptor(1.0, 0.0)
    with pytest.raises(ValueError):
        GapDescriptor(0.0, 1.0, 2.0)
    g = GapDescriptor(0.0, 1.0)
    assert g.E_ref == 0.5 and g.width == 1.0 and g.at(0.2).E_ref == 0.2


def test_bulk_gap_of_harper(harper):
    lo, hi = bulk_gap(harper, -2.4)
    np.testing.assert_allclose([lo, hi], [-2.5325686, -2.2469796], atol=1e-6)
    with pytest.raises(GapClosedError):
        bulk_gap(harper, -2.57)


def test_validate_gap_catches_band(harper):
    with pytest.raises(GapClosedError):
        validate_gap(harper, GapDescriptor(-2.6, -2.4))
    validate_gap(harper, make_gap(harper, -2.4))


@pytest.mark.parametrize("E, ei", [(-2.7, 0), (-2.4, -2), (-1.9, 3), (1.9, -3), (2.4, 2)])
def test_harper_edge_indices(harper, E, ei):
    gap = make_gap(harper, E)
    assert edge_index(harper, gap) == ei
    assert sum(c.nu * c.mult for c in maslov_crossings(harper, gap)) == ei


def test_winding_steps_are_resolved(harper):
    samples, w = winding_samples(harper, -1.9, 64)
    phases = np.angle([d for _, d in samples])
    inc = np.angle(np.exp(1j * np.diff(phases)))
    assert np.all(np.abs(inc) < np.pi / 2)
    assert round(w) == 3


def test_edge_index_constant_in_gap(harper):
    gap = make_gap(harper, -2.4)
    values = {edge_index(harper, gap, E=E) for E in np.linspace(gap.E_minus, gap.E_plus, 5)}
    assert values == {-2}


@pytest.mark.parametrize("model", [build_square_laplacian(1.0), build_spin_orbit_square(1.0, 0.7)])
@pytest.mark.parametrize("E", [-6.5, 6.5, 12.0])
def test_models_without_edge_states(model, E):
    gap = make_gap(model, E, k1_grid=64)
    assert edge_index(model, gap) == 0
    assert edge_bands(model, gap) == []


def test_edge_energies_are_zeros_of_u(harper):
    for E, deg in edge_energies(harper, 0.4, -2.5, -2.28):
        th = edge_unitary(harper, E, 0.4).phases()
        assert np.min(np.abs(th)) < 1e-8 and deg == 1


def test_edge_bands_csv(harper, tmp_path):
    gap = make_gap(harper, -2.4, k1_grid=32)
    bands = edge_bands(harper, gap, workers=2)
    assert bands
    path = tmp_path / "e.csv"
    write_edge_bands_csv(bands, path)
    assert path.read_text().splitlines()[0] == "k1,E,band_id,degeneracy"


def test_crossing_slopes_relation(harper):
    # exact identity d theta/d k1 = -(d theta/d E) (d E_edge/d k1)
    for k, dth_dk, de_dk, dth_de in crossing_slopes(harper, make_gap(harper, -1.9)):
        np.testing.assert_allclose(dth_dk, -dth_de * de_dk, rtol=1e-4)


def test_invariant_report_consistency(harper):
    rep = invariant_report(harper, make_gap(harper, -1.9))
    assert rep.Ei == 3 and rep.Ei2 is None and rep.SEi is None
    assert rep.diagnostics["winding_nodes"] >= 256


def test_edge_current_harper(harper):
    rep = edge_current(harper, (-2.45, -2.35))
    assert rep.ei == -2
    assert rep.deviation < 0.02


def test_kane_mele_z2(kane_mele):
    gap = make_gap(kane_mele, 0.0)
    assert edge_z2_index(kane_mele, gap) == 1
    assert edge_index(kane_mele, gap) == 0
    with pytest.raises(ModelError):
        spin_edge_indices(kane_mele, gap)


def test_kane_mele_spin_indices(kane_mele_nr):
    gap = make_gap(kane_mele_nr, 0.0)
    assert spin_edge_indices(kane_mele_nr, gap) == [-1, 1]
    assert edge_z2_index(kane_mele_nr, gap) == 1


def test_z2_needs_time_reversal(harper):
    with pytest.raises(ModelError):
        edge_z2_index(harper, make_gap(harper, -2.4))


def test_bulk_edge_check_harper(harper):
    rep = bulk_edge_check(harper, -2.7, -2.4, n_grid=32)
    assert rep["ok"] and rep["Ch"] == -2 and rep["rank"] == 1


def test_bulk_edge_check_kane_mele():
    m = build_kane_mele(1.0, (1.0, 1.0, 0.9), lambda_so=1.0, lambda_st=0.45)
    rep = bulk_edge_check(m, -6.0, 0.0, n_grid=24, k1_grid=128)
    assert rep["ok"] and rep["SCh"] == [-1, 1] and rep["Ch2"] == 1
