import numpy as np
import pytest

import locsketch


def test_fold_conserves_mass():
    img = np.arange(64 * 64, dtype=float).reshape(64, 64)
    z = locsketch.fold(img, 13)
    assert z.shape == (13, 13)
    assert z.sum() == pytest.approx(img.sum())


def test_aduaf_single_star_round_trip():
    img = np.zeros((800, 800))
    img[17, 413] = 100.0
    stars = locsketch.aduaf_recover(locsketch.fold(img, 26), locsketch.fold(img, 31))
    assert stars.shape == (1, 3)
    assert stars[0, 0] == pytest.approx(17.5)
    assert stars[0, 1] == pytest.approx(413.5)


def test_codes_correct_one_error():
    word = locsketch.rs_encode(11, 3, 8, 700)
    word[4] = (word[4] + 1) % 11
    assert locsketch.rs_decode(11, 3, 8, word) == 700
    moduli = [11, 13, 17, 19, 23, 25]
    word = locsketch.crt_encode(moduli, 2, 61, 42)
    word[0] = (word[0] + 3) % 11
    assert locsketch.crt_decode(moduli, 2, 61, word) == 42


def test_catalog_is_deterministic():
    a = locsketch.generate_catalog(3, 100)
    b = locsketch.generate_catalog(3, 100)
    assert np.array_equal(a, b)
    assert a[1, 2] == pytest.approx(2.0 ** -1.17)


def test_theory_trial_reports_diagnostics():
    d = locsketch.theory_trial(seed=1, n=128, k=8)
    assert d["correct"] <= d["full_cells"] <= 8
    assert d["success"] in (True, False)


def test_errors_become_python_exceptions():
    with pytest.raises(ValueError):
        locsketch.fold(np.zeros((3, 4)), 2)
