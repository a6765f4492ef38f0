import sys
import os

import pytest

# Add src directory to Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

SQUARE_WELL = {
    "box": {"d": 2, "L": 6.0},
    "potential": {"shape": "square_well", "depth": 0.3, "hard_core": 0.5, "range": 1.0},
}


@pytest.fixture
def client():
    """Provide a test client with an empty response cache."""
    from fastapi.testclient import TestClient
    from gibbsdyn.api import app

    client = TestClient(app)
    client.post("/cache/clear")
    return client


def test_health_endpoint(client):
    """Test the health check endpoint."""
    from gibbsdyn import __version__

    response = client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "healthy", "version": __version__}


def test_constants_for_ideal_gas(client):
    """Thresholds are unbounded and reported as strings."""
    response = client.post("/constants", json={})
    assert response.status_code == 200
    data = response.json()
    assert data["B"] == 0.0
    assert data["C"] == 0.0
    assert data["z_threshold_1"] == "inf"
    assert data["nonnegative"] is True
    assert data["kernel_l1_norm"] == pytest.approx(3.141592653589793)


def test_constants_for_square_well(client):
    response = client.post("/constants", json=SQUARE_WELL)
    assert response.status_code == 200
    data = response.json()
    assert data["B"] == pytest.approx(0.15 * 25)
    assert data["C"] > 0
    assert 0 < data["z_threshold_1"] < data["z_threshold_2"]
    assert data["nonnegative"] is False
    assert "kawasaki" in data["integrability"]


def test_constants_are_cached(client):
    client.post("/constants", json=SQUARE_WELL)
    client.post("/constants", json=SQUARE_WELL)
    stats = client.get("/cache/stats").json()
    assert stats["size"] == 1
    assert stats["max_size"] == 128
    assert client.post("/cache/clear").json() == {"status": "cache cleared"}
    assert client.get("/cache/stats").json()["size"] == 0


def test_invalid_request_is_rejected(client):
    response = client.post("/constants", json={"box": {"d": 5}})
    assert response.status_code == 422
    # a smooth bump centered inside its own width is rejected by the builder
    response = client.post("/constants", json={"potential": {"shape": "smooth_bump", "center": 0.5}})
    assert response.status_code == 422


def test_attractive_potential_needs_a_cap(client):
    response = client.post("/constants", json={"potential": {"shape": "smooth_bump", "amplitude": 0.5}})
    assert response.status_code == 422
    assert "neighbor_cap" in response.json()["detail"]
