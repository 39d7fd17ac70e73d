import math

import numpy as np
import pytest

from microcasimir.material import (
    EPS_STATIC_SENTINEL,
    DomainError,
    DrudeMaterial,
    PerfectConductor,
    load_material,
    parse_material_config,
    permittivity_imag_freq,
    preset_names,
    reduced_polarizability,
)


def test_permittivity_drude_form():
    m = DrudeMaterial(2.0, 0.5)
    assert permittivity_imag_freq(m, 1.0) == pytest.approx(1.0 + 4.0 / 1.5, rel=1e-15)
    xi = np.array([0.5, 1.0, 3.0])
    np.testing.assert_allclose(permittivity_imag_freq(m, xi), 1.0 + 4.0 / (xi ** 2 + 0.5 * xi))


def test_static_limit_returns_sentinel():
    assert permittivity_imag_freq(DrudeMaterial(1.0), 0.0) == EPS_STATIC_SENTINEL


def test_permittivity_decreases_to_one():
    m = DrudeMaterial(1.0, 0.1)
    xi = np.geomspace(1e-3, 1e4, 50)
    eps = permittivity_imag_freq(m, xi)
    assert np.all(np.diff(eps) < 0)
    assert eps[-1] == pytest.approx(1.0, abs=1e-7)


def test_negative_frequency_rejected():
    with pytest.raises(DomainError):
        permittivity_imag_freq(DrudeMaterial(1.0), -0.1)
    with pytest.raises(DomainError):
        reduced_polarizability(PerfectConductor(), -1.0)


def test_polarizability_matches_clausius_mossotti():
    m = DrudeMaterial(1.3, 0.2)
    for xi in (0.01, 0.4, 2.0, 50.0):
        eps = permittivity_imag_freq(m, xi)
        assert reduced_polarizability(m, xi) == pytest.approx((eps - 1) / (eps + 2), rel=1e-12)
    assert reduced_polarizability(m, 0.0) == 1.0


def test_perfect_conductor_polarizability_is_one():
    np.testing.assert_array_equal(reduced_polarizability(PerfectConductor(), np.array([0.0, 1.0, 1e9])), 1.0)


@pytest.mark.parametrize("kwargs", [dict(plasma_frequency=0.0), dict(plasma_frequency=1.0, damping=-1.0),
                                    dict(plasma_frequency=1.0, radius=0.0)])
def test_invalid_drude_parameters(kwargs):
    with pytest.raises(DomainError):
        DrudeMaterial(**kwargs)


def test_series_warning():
    assert not DrudeMaterial(1.0, 0.05).series_warning
    assert DrudeMaterial(1.0, 0.5).series_warning


def test_presets_ship():
    assert {"gold", "perfect"} <= set(preset_names())
    assert isinstance(load_material("perfect"), PerfectConductor)


def test_gold_preset_reduced_units():
    gold = load_material("gold")
    c = 299_792_458.0
    assert gold.plasma_frequency == pytest.approx(1.38e16 * 1e-9 / c, rel=1e-12)
    assert gold.damping == pytest.approx(1.075e14 * 1e-9 / c, rel=1e-12)
    assert gold.radius == 1.0
    # plasma wavelength of gold is about 136 nm
    assert 130 < gold.plasma_wavelength < 140


def test_config_file_roundtrip(tmp_path):
    path = tmp_path / "m.cfg"
    path.write_text("# a test metal\nunits = reduced\nomega_p = 2.5\ngamma = 0.1\nradius = 3\n")
    m = load_material(str(path))
    assert m == DrudeMaterial(2.5, 0.1, 3.0)


def test_config_errors():
    with pytest.raises(ValueError):
        parse_material_config("omega_p 2")
    with pytest.raises(ValueError):
        parse_material_config("colour = red")
    with pytest.raises(ValueError):
        parse_material_config("gamma = 1")
    with pytest.raises(ValueError):
        load_material("unobtainium")


def test_length_unit_rescales():
    m1 = parse_material_config("omega_p = 1e16", length_unit_m=1e-9)
    m2 = parse_material_config("omega_p = 1e16", length_unit_m=1e-8)
    assert m2.plasma_frequency == pytest.approx(10 * m1.plasma_frequency, rel=1e-14)
    assert not math.isnan(m1.plasma_wavelength)
