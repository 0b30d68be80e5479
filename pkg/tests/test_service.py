import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from pmsdr import generate_dataset, project, fit_linear, stream_init, stream_update
from pmsdr import state_to_json, stream_result
from pmsdr.serialize import fit_document, project_document
from pmsdr.service.app import create_app

GOLDEN_EVALUES = [0.7802035134, 0.0450979178, 0.0069745442, 0.0013436194, 0.0002315534]
GOLDEN_CRITERION = [0.7714345, 0.8077633, 0.8059689, 0.7985434, 0.7900059]


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


@pytest.fixture(scope="module")
def ratio_data():
    x, y = generate_dataset("ratio", 150, 5, seed=80)
    return x, y


def fit_payload(x, y, **kw):
    payload = {"x": x.tolist(), "y": y.tolist()}
    payload.update(kw)
    return payload


class TestHealth:
    def test_healthz(self, client):
        body = client.get("/healthz").json()
        assert body["status"] == "ok"


class TestFitEndpoint:
    def test_document_shape(self, client, ratio_data):
        x, y = ratio_data
        body = client.post("/fit", json=fit_payload(x, y)).json()
        assert body["schema_version"] == 1
        assert body["kind"] == "linear"
        assert body["n"] == 150
        assert body["loss"] == "svm"
        assert len(body["evalues"]) == 5
        assert len(body["evectors"]) == 5
        assert len(body["slices"]) == len(body["cutpoints"])

    def test_matches_library_fit(self, client, ratio_data):
        x, y = ratio_data
        body = client.post("/fit", json=fit_payload(x, y)).json()
        local = fit_document(fit_linear(x, y))
        assert body["evalues"] == local["evalues"]
        assert body["evectors"] == local["evectors"]

    def test_custom_expression_loss(self, client, ratio_data):
        x, y = ratio_data
        body = client.post(
            "/fit", json=fit_payload(x, y, loss="custom", custom_loss="log(1+exp(-u))")
        ).json()
        assert body["loss"] == "custom"
        assert len(body["evalues"]) == 5

    def test_custom_without_expression_rejected(self, client, ratio_data):
        x, y = ratio_data
        resp = client.post("/fit", json=fit_payload(x, y, loss="custom"))
        assert resp.status_code == 400
        assert resp.json()["detail"]["kind"] == "input"

    def test_weighted_loss_on_continuous_response_rejected(self, client, ratio_data):
        x, y = ratio_data
        resp = client.post("/fit", json=fit_payload(x, y, loss="wsvm"))
        assert resp.status_code == 400
        body = resp.json()["detail"]
        assert body["kind"] == "input"
        assert "binary" in body["message"]

    def test_numeric_failure_reported_with_module(self, client, ratio_data):
        x, y = ratio_data
        resp = client.post("/fit", json=fit_payload(x, y, loss="lssvm", eta=1e300))
        assert resp.status_code == 400
        body = resp.json()["detail"]
        assert body["kind"] == "numeric"
        assert body["module"] == "solver"

    def test_validation_error_on_nonpositive_lambda(self, client, ratio_data):
        x, y = ratio_data
        resp = client.post("/fit", json={**fit_payload(x, y), "lambda": -1.0})
        assert resp.status_code == 422

    def test_ragged_matrix_rejected(self, client):
        resp = client.post("/fit", json={"x": [[1.0, 2.0], [3.0]], "y": [1.0, 2.0]})
        assert resp.status_code in (400, 422)


class TestKernelEndpoint:
    def test_document_embeds_basis(self, client):
        x, y = generate_dataset("radial", 90, 5, seed=81)
        body = client.post("/fit-kernel", json=fit_payload(x, y)).json()
        assert body["kind"] == "kernel"
        kernel = body["kernel"]
        assert kernel["b"] == len(kernel["lam"])
        assert len(kernel["train_x"]) == 90
        assert len(body["evalues"]) == kernel["b"]

    def test_projection_round_trip(self, client):
        x, y = generate_dataset("radial", 80, 4, seed=82)
        doc = client.post("/fit-kernel", json=fit_payload(x, y)).json()
        newx = np.random.default_rng(83).standard_normal((6, 4))
        resp = client.post("/project", json={"fit": doc, "x": newx.tolist(), "d": 2}).json()
        local = project_document(doc, newx, d=2)
        assert np.abs(np.asarray(resp["coordinates"]) - local).max() <= 1e-12
        assert resp["d"] == 2


class TestBicEndpoint:
    def test_golden(self, client):
        body = client.post(
            "/bic", json={"evalues": GOLDEN_EVALUES, "n": 200, "rho": 0.03}
        ).json()
        assert np.abs(np.asarray(body["criterion"]) - GOLDEN_CRITERION).max() <= 1e-6
        assert body["d_hat"] == 2

    def test_p_max(self, client):
        body = client.post(
            "/bic", json={"evalues": GOLDEN_EVALUES, "n": 200, "rho": 0.03, "p_max": 2}
        ).json()
        assert len(body["criterion"]) == 2


class TestProjectEndpoint:
    def test_linear_matches_library(self, client, ratio_data):
        x, y = ratio_data
        doc = client.post("/fit", json=fit_payload(x, y)).json()
        resp = client.post("/project", json={"fit": doc, "x": x.tolist(), "d": 2}).json()
        fit = fit_linear(x, y)
        assert np.abs(np.asarray(resp["coordinates"]) - project(fit, x, d=2)).max() <= 1e-12

    def test_default_dimension_by_kind(self, client, ratio_data):
        x, y = ratio_data
        doc = client.post("/fit", json=fit_payload(x, y)).json()
        resp = client.post("/project", json={"fit": doc, "x": x.tolist()}).json()
        assert resp["d"] == 1

    def test_column_mismatch_rejected(self, client, ratio_data):
        x, y = ratio_data
        doc = client.post("/fit", json=fit_payload(x, y)).json()
        resp = client.post("/project", json={"fit": doc, "x": [[1.0, 2.0]]})
        assert resp.status_code == 400


class TestStreamEndpoints:
    def test_init_and_update_match_library(self, client):
        x, y = generate_dataset("ratio", 500, 4, seed=84)
        init = client.post(
            "/stream/init", json={"x": x[:250].tolist(), "y": y[:250].tolist()}
        ).json()
        lib_state = stream_init(x[:250], y[:250])
        assert init["state"] == state_to_json(lib_state)
        assert init["fit"]["kind"] == "realtime"

        upd = client.post(
            "/stream/update",
            json={"state": init["state"], "x": x[250:].tolist(), "y": y[250:].tolist()},
        ).json()
        lib_state2 = stream_update(lib_state, x[250:], y[250:])
        assert upd["state"] == state_to_json(lib_state2)
        assert upd["fit"]["evalues"] == stream_result(lib_state2).evalues.tolist()

    def test_realtime_fit_projects(self, client):
        x, y = generate_dataset("ratio", 300, 4, seed=85)
        init = client.post("/stream/init", json={"x": x.tolist(), "y": y.tolist()}).json()
        resp = client.post("/project", json={"fit": init["fit"], "x": x[:5].tolist()}).json()
        assert len(resp["coordinates"]) == 5

    def test_corrupt_state_rejected(self, client):
        resp = client.post(
            "/stream/update", json={"state": "{\"schema_version\": 99}", "x": [[1.0]], "y": [1.0]}
        )
        assert resp.status_code == 400


class TestGenerateEndpoint:
    def test_deterministic_csv(self, client):
        req = {"model": "ratio", "n": 50, "p": 3, "seed": 5}
        a = client.post("/generate", json=req)
        b = client.post("/generate", json=req)
        assert a.headers["content-type"].startswith("text/csv")
        assert a.text == b.text
        assert a.text.splitlines()[0] == "x1,x2,x3,y"

    def test_unknown_model(self, client):
        resp = client.post("/generate", json={"model": "nosuch", "n": 50, "p": 3, "seed": 0})
        assert resp.status_code == 400
