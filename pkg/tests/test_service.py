"""HTTP service: endpoint contracts, error mapping, payload round trips."""

import math

import numpy as np
import pytest
from fastapi.testclient import TestClient

from conebiharm import __version__
from conebiharm.geometry import Representation, ScalarField, SectorSpec, StripGrid
from conebiharm.service import FieldPayload, app

TAU = 4.212392230490661


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


class TestHealth:
    def test_health(self, client):
        resp = client.get("/health")
        assert resp.status_code == 200
        assert resp.json() == {"status": "ok", "version": __version__}


class TestRoots:
    def test_default_window(self, client):
        resp = client.post("/roots", json={})
        assert resp.status_code == 200
        body = resp.json()
        assert body["tau"] == pytest.approx(TAU, abs=1e-12)
        roots = body["roots"]
        assert roots, "default window must contain roots"
        assert all(r["residual"] <= 1e-10 for r in roots)
        ims = [r["im"] for r in roots]
        assert ims == sorted(ims)
        first = roots[0]
        assert first["branch"] == "minus"
        assert first["re"] == pytest.approx(2.2507286116, abs=1e-6)
        assert first["im"] == pytest.approx(TAU, abs=1e-9)

    def test_window_shrinks_root_set(self, client):
        small = client.post("/roots", json={"re_max": 4.0, "im_max": 5.0}).json()
        full = client.post("/roots", json={}).json()
        assert len(small["roots"]) == 1
        assert len(full["roots"]) > len(small["roots"])

    def test_nonpositive_window_rejected(self, client):
        assert client.post("/roots", json={"re_max": -1.0}).status_code == 422

    def test_unknown_field_rejected(self, client):
        assert client.post("/roots", json={"window": 3}).status_code == 422


class TestAdmissible:
    def test_half_plane_angle_not_admissible_at_p2(self, client):
        resp = client.post("/admissible", json={"omega": math.pi, "p": 2.0})
        assert resp.status_code == 200
        row = resp.json()["result"]
        assert row["admissible"] is False
        assert row["nu"] == pytest.approx(2.0)
        assert row["lhs"] == pytest.approx(2.0 * math.pi)
        assert row["p_max"] == pytest.approx(1.2054336801, abs=1e-6)

    def test_narrow_angle_admissible(self, client):
        resp = client.post("/admissible", json={"omega": 0.4 * math.pi, "p": 2.0})
        assert resp.json()["result"]["admissible"] is True

    def test_sweep_rows(self, client):
        resp = client.post(
            "/admissible",
            json={
                "omega": math.pi,
                "p": 2.0,
                "p_values": [1.1, 4.0],
                "omega_values": [0.4 * math.pi],
            },
        )
        sweep = resp.json()["sweep"]
        assert len(sweep) == 3
        assert sweep[0]["p"] == pytest.approx(1.1)
        assert sweep[0]["admissible"] is True  # below p_max for omega = pi
        assert sweep[1]["admissible"] is False
        assert sweep[2]["omega"] == pytest.approx(0.4 * math.pi)
        assert sweep[2]["admissible"] is True

    def test_missing_omega_rejected(self, client):
        assert client.post("/admissible", json={"p": 2.0}).status_code == 422

    def test_bad_domain_maps_to_422(self, client):
        resp = client.post("/admissible", json={"omega": -1.0})
        assert resp.status_code == 422
        body = resp.json()
        assert body["error"] == "DomainError"
        assert "omega" in body["message"]


class TestSolve:
    def test_zero_source_gives_zero_fields(self, client):
        resp = client.post(
            "/solve",
            json={
                "omega": 0.4 * math.pi,
                "nt": 33,
                "ntheta": 9,
                "T": 4.0,
                "source": "zero",
            },
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["residual"] == 0.0
        assert body["admissible"] is True
        assert body["warnings"] == []
        for key, tag in (("v1", "strip_v1"), ("v2", "strip_v2"), ("v", "sector_v")):
            payload = body[key]
            assert payload["representation"] == tag
            assert payload["nt"] == 33 and payload["ntheta"] == 9
            assert all(x == 0.0 for row in payload["values"] for x in row)

    def test_manufactured_inadmissible_pair_warns(self, client):
        resp = client.post(
            "/solve",
            json={"omega": 0.9 * math.pi, "nt": 33, "ntheta": 9, "T": 4.0},
        )
        body = resp.json()
        assert body["admissible"] is False
        assert any("admissible range" in w for w in body["warnings"])
        values = np.asarray(body["v"]["values"])
        assert np.any(values != 0.0)

    def test_unsupported_order_maps_to_422(self, client):
        resp = client.post(
            "/solve",
            json={"omega": 0.4 * math.pi, "nt": 33, "ntheta": 9, "T": 4.0, "order": 3},
        )
        assert resp.status_code == 422
        assert resp.json()["error"] == "ConfigError"
        assert "order 2" in resp.json()["message"]

    def test_bad_source_literal_rejected(self, client):
        resp = client.post("/solve", json={"omega": 1.0, "source": "random"})
        assert resp.status_code == 422


class TestNorms:
    def test_smooth_case_passes_all_claims(self, client):
        resp = client.post(
            "/norms",
            json={"omega": 0.9 * math.pi, "nt": 193, "ntheta": 9, "T": 12.0},
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["passed"] is True
        assert [c["key"] for c in body["claims"]] == ["a", "b", "c", "d"]
        assert all(c["status"] == "pass" for c in body["claims"])
        report = body["report"]
        assert len(report) == 15
        pairs = {(row["i"], row["j"]) for row in report}
        assert pairs == {(i, j) for i in range(5) for j in range(5 - i)}
        by_pair = {(row["i"], row["j"]): row for row in report}
        assert by_pair[(0, 0)]["gamma"] == pytest.approx(-4 + 1 / 2)
        assert by_pair[(4, 0)]["gamma"] == pytest.approx(3 - 1 / 2)

    def test_claim_statements_present(self, client):
        resp = client.post(
            "/norms",
            json={"omega": 0.9 * math.pi, "nt": 193, "ntheta": 9, "T": 12.0},
        )
        for claim in resp.json()["claims"]:
            assert claim["statement"]
            assert claim["checks"]


class TestMms:
    def test_admissible_pair_converges_warning_free(self, client):
        resp = client.post(
            "/mms",
            json={
                "omega": 0.4 * math.pi,
                "T": 4.0,
                "grids": [[16, 9], [32, 17], [64, 33]],
            },
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["warnings"] == []
        rows = body["rows"]
        assert len(rows) == 3
        assert rows[0]["order"] is None
        errors = [r["error"] for r in rows]
        assert errors == sorted(errors, reverse=True)
        assert rows[-1]["order"] == pytest.approx(2.0, abs=0.4)
        assert all(r["flagged"] is False for r in rows)

    def test_inadmissible_pair_is_reported(self, client):
        resp = client.post(
            "/mms",
            json={
                "omega": 0.9 * math.pi,
                "T": 4.0,
                "grids": [[16, 9], [32, 17], [64, 33]],
            },
        )
        body = resp.json()
        assert any("admissible range" in w for w in body["warnings"])

    def test_too_few_grids_maps_to_422(self, client):
        resp = client.post(
            "/mms", json={"omega": 0.4 * math.pi, "grids": [[16, 9], [32, 17]]}
        )
        assert resp.status_code == 422
        assert resp.json()["error"] == "DomainError"


class TestFieldPayload:
    def test_round_trip(self):
        grid = StripGrid(SectorSpec(omega=1.5, rho=0.2), T=3.0, nt=7, ntheta=4)
        rng = np.random.default_rng(911)
        field = ScalarField(grid, rng.standard_normal(grid.shape), Representation.STRIP_V2)
        back = FieldPayload.from_field(field).to_field()
        assert back.rep is Representation.STRIP_V2
        assert back.grid == grid
        assert np.array_equal(back.values, field.values)
