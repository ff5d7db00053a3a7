"""Grid construction, log-radial maps, exponent tables, field containers."""

from __future__ import annotations

import math

import numpy as np
import pytest

from conebiharm import (
    DomainError,
    ExponentSet,
    Representation,
    ScalarField,
    SectorSpec,
    StripGrid,
    from_strip,
    inverse_log_map,
    log_map,
    to_strip,
    weight_exponents,
)


def make_grid(omega=0.9 * math.pi, rho=0.1, T=6.0, nt=41, ntheta=17, k=0.0):
    return StripGrid(SectorSpec(omega=omega, rho=rho, k=k), T=T, nt=nt, ntheta=ntheta)


class TestMaps:
    def test_round_trip_random_radii(self):
        # property: inverse_log_map(log_map(r)) == r to a few ulp, any rho in (0, 1]
        rng = np.random.RandomState(7)
        for _ in range(200):
            rho = rng.uniform(1e-3, 1.0)
            r = rho * rng.uniform(1e-12, 1.0)
            t = log_map(r, rho)
            back = inverse_log_map(t, rho)
            assert abs(back - r) <= 4 * np.spacing(r)

    def test_vertex_and_arc(self):
        assert log_map(0.1, 0.1) == 0.0
        assert inverse_log_map(0.0, 0.1) == 0.1
        # t grows without bound toward the vertex
        assert log_map(1e-300, 1.0) > 600

    def test_domain_checks(self):
        with pytest.raises(DomainError):
            log_map(0.0, 0.1)
        with pytest.raises(DomainError):
            log_map(0.2, 0.1)
        with pytest.raises(DomainError):
            inverse_log_map(-1.0, 0.1)


class TestExponents:
    def test_nu_reference_values(self):
        assert weight_exponents(2.0).nu == pytest.approx(2.0, abs=1e-15)
        assert weight_exponents(1.1).nu == pytest.approx(3.0 - 2.0 / 1.1, abs=1e-15)
        assert weight_exponents(100.0).nu == pytest.approx(2.98, abs=1e-15)

    def test_nu_in_open_interval_and_monotone(self):
        # property: p -> nu is increasing from 1 (p->1+) to 3 (p->inf)
        ps = np.exp(np.linspace(np.log(1.0 + 1e-9), np.log(1e9), 300))
        nus = np.array([weight_exponents(p).nu for p in ps])
        assert np.all(nus > 1.0) and np.all(nus < 3.0)
        assert np.all(np.diff(nus) > 0)

    def test_gamma_table(self):
        exps = weight_exponents(2.0)
        assert exps.gamma == pytest.approx((-3.5, -2.5, -1.5, 1.5, 2.5), abs=1e-15)
        # structure: gamma_i = -4 + i + 1/p for i <= 2, gamma_i = i - 1 - 1/p for i >= 3
        for p in (1.1, 2.0, 7.0, 100.0):
            g = weight_exponents(p).gamma
            for i in range(3):
                assert g[i] == pytest.approx(-4.0 + i + 1.0 / p, abs=1e-14)
            for i in (3, 4):
                assert g[i] == pytest.approx(i - 1.0 - 1.0 / p, abs=1e-14)

    def test_rejects_p_at_or_below_one(self):
        with pytest.raises(DomainError):
            ExponentSet(1.0)
        with pytest.raises(DomainError):
            ExponentSet(0.5)


class TestStripGrid:
    def test_node_zero_maps_to_rho_exactly(self):
        g = make_grid(rho=0.37)
        assert g.r[0] == 0.37
        assert g.t[0] == 0.0 and g.t[-1] == g.T

    def test_geometric_radii(self):
        g = make_grid()
        ratio = g.r[1:] / g.r[:-1]
        assert np.allclose(ratio, math.exp(-g.ht), rtol=1e-13)

    def test_weights_positive_and_sum(self):
        # property over random grid sizes: weights positive, sums T and omega
        rng = np.random.RandomState(11)
        for _ in range(25):
            nt = int(rng.randint(3, 200))
            nth = int(rng.randint(3, 100))
            T = float(rng.uniform(0.5, 30.0))
            omega = float(rng.uniform(0.05, 2.0 * math.pi))
            g = make_grid(omega=omega, T=T, nt=nt, ntheta=nth)
            assert np.all(g.wt > 0) and np.all(g.wtheta > 0)
            assert g.wt.sum() == pytest.approx(T, rel=1e-12)
            assert g.wtheta.sum() == pytest.approx(omega, rel=1e-12)

    def test_validation(self):
        with pytest.raises(DomainError):
            make_grid(T=-1.0)
        with pytest.raises(DomainError):
            make_grid(nt=2)
        with pytest.raises(DomainError):
            SectorSpec(omega=0.0)
        with pytest.raises(DomainError):
            SectorSpec(omega=2.0 * math.pi + 0.1)
        with pytest.raises(DomainError):
            SectorSpec(omega=1.0, rho=0.0)
        with pytest.raises(DomainError):
            SectorSpec(omega=1.0, k=-1.0)


class TestScalarField:
    def test_immutability_and_shape_check(self):
        g = make_grid()
        f = ScalarField(g, np.ones(g.shape), Representation.SECTOR_V)
        with pytest.raises(ValueError):
            f.values[0, 0] = 2.0
        with pytest.raises(DomainError):
            ScalarField(g, np.ones((3, 3)), Representation.SECTOR_V)

    def test_rejects_non_finite(self):
        g = make_grid()
        bad = np.ones(g.shape)
        bad[2, 2] = np.nan
        with pytest.raises(DomainError):
            ScalarField(g, bad, Representation.SECTOR_V)


class TestStripConversion:
    def test_power_field_maps_to_one(self):
        # v = r^{nu+1}  ->  V1 identically 1
        g = make_grid()
        exps = weight_exponents(2.0)
        v = ScalarField(g, np.repeat((g.r ** (exps.nu + 1.0))[:, None], g.ntheta, axis=1),
                        Representation.SECTOR_V)
        v1 = to_strip(v, exps)
        assert v1.rep is Representation.STRIP_V1
        assert np.allclose(v1.values, 1.0, rtol=1e-13)

    def test_round_trip(self):
        # property: from_strip(to_strip(v)) == v to <= 1e-12 relative, any rho in (0, 1]
        rng = np.random.RandomState(3)
        for _ in range(20):
            rho = float(rng.uniform(1e-3, 1.0))
            p = float(rng.uniform(1.01, 50.0))
            g = make_grid(rho=rho, T=float(rng.uniform(1.0, 14.0)))
            exps = weight_exponents(p)
            vals = rng.uniform(0.5, 2.0, size=g.shape)  # bounded away from 0
            v = ScalarField(g, vals, Representation.SECTOR_V)
            back = from_strip(to_strip(v, exps), exps)
            assert np.max(np.abs(back.values - vals) / np.abs(vals)) <= 1e-12
            assert back.rep is Representation.SECTOR_V

    def test_representation_guard(self):
        g = make_grid()
        exps = weight_exponents(2.0)
        w = ScalarField(g, np.ones(g.shape), Representation.SECTOR_W)
        with pytest.raises(DomainError):
            to_strip(w, exps)
        with pytest.raises(DomainError):
            from_strip(w, exps)
