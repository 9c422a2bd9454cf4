import math

import numpy as np
import pytest

from oracles import (BESSEL_REF, J0_FIRST_ZERO, J1_FIRST_ZERO,
                     LAMBDA0_DIRICHLET_R1_H1, ROBIN1_FIRST_ROOT)
from striplab.geometry import CylinderGeometry, Disk, Polygon
from striplab.limits import (BesselDomainError, LimitSpectrum,
                             LimitSpectrumRequest, axial_eigenvalue, bessel_j,
                             bessel_j_derivative, closed_form_limit_spectrum,
                             export_limit_csv, fem_limit_spectrum, radial_roots)


class TestBesselJ:
    def test_values_at_zero(self):
        assert bessel_j(0, 0.0) == 1.0
        assert bessel_j(1, 0.0) == 0.0
        assert bessel_j(7, 0.0) == 0.0

    def test_normalization_identity_unrelated_point(self):
        x = 7.3
        s = bessel_j(0, x) + 2.0 * sum(bessel_j(2 * m, x) for m in range(1, 26))
        assert abs(s - 1.0) < 1e-12

    def test_first_zero_of_j0(self):
        assert abs(bessel_j(0, J0_FIRST_ZERO)) < 1e-12

    @pytest.mark.parametrize("n,x,ref", BESSEL_REF)
    def test_against_series_oracle(self, n, x, ref):
        assert abs(bessel_j(n, x) - ref) <= 1e-12

    def test_derivative_identity(self):
        # J_0' = -J_1; general J_n' = (J_{n-1} - J_{n+1})/2
        for x in (0.7, 2.0, 13.5):
            assert bessel_j_derivative(0, x) == pytest.approx(-bessel_j(1, x), abs=1e-13)
        assert bessel_j_derivative(3, 7.3) == pytest.approx(
            0.5 * (bessel_j(2, 7.3) - bessel_j(4, 7.3)), abs=1e-13)

    def test_domain_window(self):
        with pytest.raises(BesselDomainError):
            bessel_j(51, 1.0)
        with pytest.raises(BesselDomainError):
            bessel_j(0, 501.0)
        with pytest.raises(BesselDomainError):
            bessel_j(0, -1.0)


class TestRadialRoots:
    def test_dirichlet_first_zero(self):
        κ = radial_roots(0, 1)[0]
        assert κ == pytest.approx(J0_FIRST_ZERO, rel=1e-12)

    def test_neumann_includes_constant_mode(self):
        roots = radial_roots(0, 2, robin_coefficient=0.0)
        assert roots[0] == 0.0
        assert roots[1] == pytest.approx(J1_FIRST_ZERO, rel=1e-12)

    def test_robin_one_reference(self):
        κ = radial_roots(0, 1, robin_coefficient=1.0)[0]
        assert κ == pytest.approx(ROBIN1_FIRST_ROOT, rel=1e-12)

    def test_robin_large_approaches_dirichlet(self):
        κ = radial_roots(0, 1, robin_coefficient=1e6)[0]
        assert abs(κ - J0_FIRST_ZERO) < 1e-4

    def test_robin_monotone_in_coefficient(self):
        # kappa_{n,m}(A) is strictly increasing in A, from the Neumann root at
        # A = 0 (the n = 0 list starts with the constant mode kappa = 0) to the
        # Dirichlet root as A -> infinity
        for n in (0, 1, 3):
            dirichlet = radial_roots(n, 3)
            prev = radial_roots(n, 3, robin_coefficient=0.0)
            for A in (0.1, 1.0, 10.0, 1e6):
                cur = radial_roots(n, 3, robin_coefficient=A)
                assert all(c > p for c, p in zip(cur, prev))
                prev = cur
            for i in range(3):
                assert abs(prev[i] - dirichlet[i]) < 1e-4

    def test_radius_scaling(self):
        base = radial_roots(2, 2)
        scaled = radial_roots(2, 2, radius=2.0)
        assert np.allclose(np.array(scaled) * 2.0, base, rtol=1e-12)

    def test_interlacing_table(self):
        # j_{n,m} < j_{n+1,m} < j_{n,m+1} for the tabulated window
        zeros = {n: radial_roots(n, 11) for n in range(12)}
        for n in range(11):
            for m in range(10):
                assert zeros[n][m] < zeros[n + 1][m] < zeros[n][m + 1]


def req(geometry, k, A, method="closed_form", h=0.1):
    return LimitSpectrumRequest(geometry, k=k, robin_coefficient=A,
                                method=method, fem_size=h)


class TestClosedFormSpectrum:
    def test_neumann_first_is_axial(self):
        geo = CylinderGeometry(Disk(1.0), 1.0)
        spec = closed_form_limit_spectrum(req(geo, 1, 0.0))
        assert spec.eigenvalues[0] == pytest.approx((math.pi / 2) ** 2, rel=1e-15)
        assert spec.labels[0] == (0, 0, 0)

    def test_dirichlet_first(self):
        geo = CylinderGeometry(Disk(1.0), 1.0)
        spec = closed_form_limit_spectrum(req(geo, 1, None))
        assert spec.eigenvalues[0] == pytest.approx(LAMBDA0_DIRICHLET_R1_H1, rel=1e-12)

    def test_angular_mode_double(self):
        geo = CylinderGeometry(Disk(1.0), 1.0)
        spec = closed_form_limit_spectrum(req(geo, 8, None))
        n1 = [i for i, lab in enumerate(spec.labels) if lab[0] == 1]
        assert len(n1) >= 2
        i = n1[0]
        assert spec.eigenvalues[i] == spec.eigenvalues[i + 1]
        assert spec.multiplicities[i] == 2

    def test_ascending_with_multiplicity(self):
        geo = CylinderGeometry(Disk(1.0), 2.0)
        spec = closed_form_limit_spectrum(req(geo, 20, 1.5))
        assert np.all(np.diff(spec.eigenvalues) >= -1e-14)

    def test_ordering_across_conditions(self):
        geo = CylinderGeometry(Disk(1.0), 1.0)
        neu = closed_form_limit_spectrum(req(geo, 10, 0.0)).eigenvalues
        rob = closed_form_limit_spectrum(req(geo, 10, 1.0)).eigenvalues
        dir_ = closed_form_limit_spectrum(req(geo, 10, None)).eigenvalues
        assert np.all(neu < rob) and np.all(rob < dir_)

    def test_heap_merge_vs_brute_force(self):
        geo = CylinderGeometry(Disk(1.0), 1.0)
        for A in (None, 0.0, 1.0):
            spec = closed_form_limit_spectrum(req(geo, 20, A))
            brute = []
            for n in range(13):
                roots = radial_roots(n, 13, 1.0, A)
                mult = 1 if n == 0 else 2
                for kappa in roots[:13]:
                    for l in range(13):
                        brute.extend([kappa**2 + axial_eigenvalue(l, 1.0)] * mult)
            brute = np.sort(np.array(brute))[:20]
            assert np.allclose(spec.eigenvalues, brute, rtol=1e-13)

    def test_closed_form_requires_disk(self):
        poly = Polygon(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))
        from striplab.errors import EigensolverError
        with pytest.raises(EigensolverError):
            LimitSpectrumRequest(CylinderGeometry(poly, 1.0), k=3,
                                 robin_coefficient=None, method="closed_form")

    def test_csv_export(self, tmp_path):
        geo = CylinderGeometry(Disk(1.0), 1.0)
        spec = closed_form_limit_spectrum(req(geo, 4, None))
        path = tmp_path / "limits.csv"
        export_limit_csv(spec, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "rank,lambda,n,m,l,multiplicity,method"
        first = lines[1].split(",")
        assert float(first[1]) == pytest.approx(LAMBDA0_DIRICHLET_R1_H1, rel=1e-12)


class TestFemLimitSpectrum:
    def test_disk_matches_closed_form(self):
        geo = CylinderGeometry(Disk(1.0), 1.0)
        for A in (None, 0.0, 1.0):
            exact = closed_form_limit_spectrum(req(geo, 3, A)).eigenvalues
            spec = fem_limit_spectrum(req(geo, 3, A, method="fem", h=0.05))
            # FEM overestimates; h^2 error model at this resolution
            assert np.all(spec.eigenvalues >= exact - 1e-10)
            rel = (spec.eigenvalues - exact) / exact
            assert rel.max() < 2e-2

    def test_polygon_square_dirichlet(self):
        # square cross-section, Dirichlet lateral: lambda_1 = 2 pi^2 + (pi/2H)^2
        poly = Polygon(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))
        geo = CylinderGeometry(poly, 1.0)
        spec = fem_limit_spectrum(req(geo, 1, None, method="fem", h=0.12))
        exact = 2 * math.pi**2 + (math.pi / 2) ** 2
        assert spec.eigenvalues[0] == pytest.approx(exact, rel=5e-2)
        assert spec.eigenvalues[0] >= exact - 1e-9
