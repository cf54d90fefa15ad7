from __future__ import annotations

import math

import numpy as np
import pytest

from ksat_lab.errors import ValidationError
from ksat_lab.moments import (PsiInput, boundary_check, boundary_psi, fhat_scan, rough_bound_fhat,
                              scan_middle_ground, separability_psi, sup_psi)
from ksat_lab.moments.rough import g_vector, middle_ground_window, overlap_matrix
from ksat_lab.sp import poisson_type_ensemble, regular_type_system
from ksat_lab.thresholds import bound_main


def test_overlap_matrix_is_a_joint_law() -> None:
    O = overlap_matrix(10, 0.1, 1e-4)
    assert O.sum() == pytest.approx(1.0)
    assert np.allclose(O, O.T)
    assert O.sum(axis=1)[0] == pytest.approx(0.5 - 2.0 ** -11)
    with pytest.raises(ValidationError):
        overlap_matrix(10, 0.6, 0.0)


def test_g_vector_at_the_boundary() -> None:
    k = 10
    O = overlap_matrix(k, 0.0, 0.0)
    g = g_vector(k, O)
    d = 0.5 - 2.0 ** (-k - 1)
    assert g[:5].tolist() == [0.0] * 5
    assert g[5] == pytest.approx(1.0 - d ** k - k * 2.0 ** -k * d ** (k - 1))


def _boundary_closed_form(k: int, r: float) -> float:
    h = 0.5 - 2.0 ** (-k - 1)
    x = 2.0 ** -k
    entropy = -2.0 * h * math.log(h) - x * math.log(x)
    cc = 1.0 - h ** k - k * x * h ** (k - 1)
    return entropy + (1.0 - 8.0 ** -k) * r * math.log(cc) + x * h


@pytest.mark.parametrize("k", [8, 10, 12])
def test_boundary_psi_matches_its_closed_form(k) -> None:
    r = bound_main(k)
    assert boundary_psi(k, r) == pytest.approx(_boundary_closed_form(k, r), rel=1e-9)


def test_boundary_psi_leading_term() -> None:
    assert boundary_psi(10, bound_main(10)) == pytest.approx(1.36572e-3, abs=2e-7)
    k = 20
    assert boundary_psi(k, bound_main(k)) * 2.0 ** k == pytest.approx(2.0 - math.log(2.0), abs=0.01)
    # one unit of density below the main bound adds 2^-k
    shift = boundary_psi(k, bound_main(k) - 1.0) - boundary_psi(k, bound_main(k))
    assert shift * 2.0 ** k == pytest.approx(1.0, abs=1e-3)


def test_boundary_check_reports_the_miss() -> None:
    k = 10
    chk = boundary_check(k, bound_main(k))
    assert chk.target == pytest.approx(2.0 ** (-k - k / 3.0))
    assert chk.tolerance == pytest.approx(k * k * 4.0 ** -k)
    assert chk.deviation == pytest.approx(chk.psi - chk.target)
    assert not chk.within
    assert chk.to_dict()["within"] is False


def test_separability_psi_validates_gamma() -> None:
    k, r = 10, bound_main(10)
    inp = PsiInput(0.0, 0.0, (0.0, 0.0, 0.0, 0.0, 0.0, 1.0))
    assert separability_psi(k, r, inp) == pytest.approx(boundary_psi(k, r))
    with pytest.raises(ValidationError):
        separability_psi(k, r, PsiInput(0.0, 0.0, (0.5, 0.0, 0.0, 0.0, 0.0, 0.6)))
    with pytest.raises(ValidationError):
        separability_psi(k, r, PsiInput(0.0, 0.0, (0.0, 0.0, 0.0, 1.0)))
    with pytest.raises(ValidationError):
        # O^10 > 0 needs yy + ry mass
        separability_psi(k, r, PsiInput(0.01, 0.0, (0.0, 0.0, 0.0, 0.0, 0.0, 1.0)))


def test_sup_psi_dominates_the_start() -> None:
    k, r = 10, bound_main(10)
    sup = sup_psi(k, r, 0.0, 0.0)
    assert sup.value >= boundary_psi(k, r) - 1e-15
    assert sum(sup.gamma) == pytest.approx(1.0, abs=1e-6)
    assert set(sup.to_dict()["gamma"]) == {"yy", "rg", "ry", "gr", "yr", "cc"}


def test_middle_ground_is_negative() -> None:
    k = 10
    scan = scan_middle_ground(k, bound_main(k), grid=4000)
    assert -0.70 < scan.max_value < -0.68
    (a0, a1), (b0, b1) = middle_ground_window(k)
    assert a0 <= scan.argmax <= a1 or b0 <= scan.argmax <= b1
    assert len(scan.rows()) == 4000
    with pytest.raises(ValidationError):
        scan_middle_ground(k, 1.0, grid=1)


def test_fhat_on_the_poisson_ensemble() -> None:
    k = 10
    ts = poisson_type_ensemble(k, bound_main(k), samples=2000, seed=0)
    half = rough_bound_fhat(ts, 0.5)
    assert -0.2 < half < 0.0
    scan = fhat_scan(ts, [0.25, 0.5])
    assert scan.values[1] == half
    assert scan.rows()[0][0] == 0.25
    with pytest.raises(ValidationError):
        rough_bound_fhat(ts, 1.5)


def test_fhat_on_the_regular_system() -> None:
    ts = regular_type_system(8, 700)
    assert np.isfinite(rough_bound_fhat(ts, 0.0))
    assert np.isfinite(rough_bound_fhat(ts, 1.0))
