import json
import math
import os

import numpy as np
import pytest

import eshare

SCENARIOS = os.environ.get("ESHARE_SCENARIO_DIR", os.path.join(os.path.dirname(__file__), "..", "..", "scenarios"))


def fixture(name):
    return os.path.join(SCENARIOS, name)


def test_congested_equilibrium():
    s = eshare.load_scenario(fixture("two_prosumer_f5.json"))
    e = eshare.improved_gne(s)
    np.testing.assert_allclose(e.p, [105.0, 195.0], atol=1e-9)
    np.testing.assert_allclose(e.b, [10.5, 30.6], atol=1e-9)
    np.testing.assert_allclose(e.costs, [69.425, 381.35], atol=1e-9)
    c = eshare.clear_market(s, e.b)
    np.testing.assert_allclose(c.lam, e.lambda_r, atol=1e-9)


def test_network_and_clearing():
    net = eshare.build_network(2, [eshare.LineSpec(0, 1, 1.0, 5.0)])
    np.testing.assert_allclose(net.ptdf, [[-1.0], [0.0]])
    s = eshare.make_scenario(net, [eshare.Prosumer(0.003, 0.42, 100.0), eshare.Prosumer(0.006, 0.72, 200.0)], 10.0)
    c = eshare.clear_market(s, np.array([10.5, 30.6]))
    np.testing.assert_allclose(c.q, [-5.0, 5.0], atol=1e-12)
    assert eshare.clearing_kkt_residual(s, np.array([10.5, 30.6]), c) <= 1e-8


def test_generated_bidding_and_poa():
    s = eshare.generate_scenario(3, 8)
    assert s.size == 8
    r = eshare.run_bidding(s, eps=1e-8, max_iter=5000)
    assert r.converged
    e = eshare.improved_gne(s)
    np.testing.assert_allclose(r.b, e.b, rtol=1e-5)
    p = eshare.poa(s)
    assert p.poa >= 1.0 - 1e-9
    assert p.upper_bound is None or p.poa <= p.upper_bound + 1e-6
    again = eshare.parse_scenario(s.to_json())
    np.testing.assert_array_equal(again.D, s.D)


def test_verify_rejects_three_bus_candidate():
    s = eshare.load_scenario(fixture("three_bus_f027.json"))
    assert not eshare.verify_gne(s, np.array([1.6, 1.6, 0.8])).is_gne


def test_errors_carry_codes():
    with pytest.raises(eshare.EshareError) as info:
        eshare.load_scenario("/nonexistent/scenario.json")
    assert info.value.code == "FileError"
    net = eshare.build_network(2, [eshare.LineSpec(0, 1)])
    with pytest.raises(eshare.EshareError) as info:
        eshare.make_scenario(net, [eshare.Prosumer(1, 0, 1)], 1.0)
    assert info.value.code == "InvalidScenario"


def test_cli_in_process():
    code, out, err = eshare.run_command(["social", fixture("two_prosumer_f10.json")])
    assert code == 0, err
    doc = json.loads(out)
    assert math.isclose(doc["results"]["p"][0], 110.0, abs_tol=1e-6)
    code, _, _ = eshare.run_command(["gne", "/nonexistent.json"])
    assert code == 1
