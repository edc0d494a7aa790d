import math

import pytest

import exmerge as ex

SMALL = """
name = py
model = dirichlet
labels = 3
concentration = 1
replicates = 3
n_min = 32
n_hi = 400
posterior_count = 40
batches = 4
m = 1, 2
"""


def test_w1_between_two_point_measures():
    mu = ex.Measure([0.0, 1.0], [0.5, 0.5])
    nu = ex.Measure([1.0, 3.0], [0.5, 0.5])
    assert ex.w1_real(mu, nu) == pytest.approx(1.5, abs=1e-12)
    assert ex.ot_cost(mu, nu) == pytest.approx(1.5, abs=1e-12)


def test_prokhorov_matches_bruteforce_and_chain():
    mu = ex.Measure([0.0, 0.4, 2.0], [0.2, 0.3, 0.5])
    nu = ex.Measure([0.1, 1.5], [0.6, 0.4])
    p = ex.prokhorov(mu, nu)
    assert p == pytest.approx(ex.prokhorov_bruteforce(mu, nu), abs=1e-9)
    fm = ex.fortet_mourier(mu, nu)
    assert p <= math.sqrt(1.5 * fm) + 1e-9
    assert fm <= ex.w1_real(mu, nu) + 1e-9
    value, tail = ex.dW(mu, nu)
    assert 0.0 <= value and tail > 0.0


def test_measure_text_round_trip():
    space = ex.GroundSpace.discrete(3)
    mu = ex.Measure.on_labels(space, [0.2, 0.0, 0.8])
    assert ex.Measure.from_text(mu.to_text()) == mu
    assert len(mu) == 2


def test_errors_map_to_python_exceptions():
    with pytest.raises(ex.InvalidInput):
        ex.Measure([0.0], [0.5])
    with pytest.raises(ex.ConfigError):
        ex.posterior_rate("replicates = 0\n")
    assert issubclass(ex.ConfigError, ex.Error)


def test_bounds():
    two = ex.Measure([0.0, 1.0], [0.5, 0.5])
    assert ex.gini_bound(two) == pytest.approx(math.sqrt(0.5))
    assert ex.gini_bound(two) <= ex.moment_bound(two)
    uni = ex.Measure.on_labels(ex.GroundSpace.discrete(4), [0.25] * 4)
    value, _ = ex.pi_r(uni, 3.0)
    assert value == pytest.approx(4 * (3 / 16) ** (1 / 3))
    assert ex.rate("sqrt_n_over_loglog", 100.0) == pytest.approx(math.sqrt(100 / math.log(math.log(100))))


def test_oracle_check_passes():
    assert all(item[3] for item in ex.oracle_check(3))


def test_posterior_and_predictive_experiments():
    r = ex.posterior_rate(SMALL, "W")
    assert r["experiment"] == "posterior_W"
    assert len(r["trajectories"]) == 3
    assert r["failure"] is None
    for t in r["trajectories"]:
        assert all(row["normalized"] >= 0 for row in t["rows"])
    again = ex.posterior_rate(SMALL, "W")
    assert again["trajectories"] == r["trajectories"]
    preds = ex.predictive_rate(SMALL)
    assert [p["experiment"] for p in preds] == ["predictive_m1", "predictive_m2"]
    assert max(row["identity_gap"] for t in preds[0]["trajectories"] for row in t["rows"]) <= 1e-12


def test_empirical_bayes_inequality():
    cfg = "model = dp\nalpha = 1\ntruncation = 40\nreplicates = 2\nn_min = 32\nn_hi = 500\ng = tanh\n"
    r = ex.empirical_bayes(cfg)
    for t in r["trajectories"]:
        for row in t["rows"]:
            assert abs(row["bayes"] - row["plugin"]) <= row["raw"] + 1e-9
