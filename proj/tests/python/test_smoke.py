import numpy as np
import pytest

import cpca


@pytest.fixture
def elongated():
    rng = np.random.default_rng(7)
    return rng.normal(size=(60, 3)) * np.array([4.0, 1.0, 0.5])


def test_version():
    assert cpca.__version__ == "0.1.0"


def test_fit_cauchy_known_sample():
    fit = cpca.fit_cauchy(np.array([-1.0, 0.0, 1.0]))
    assert fit["mu"] == pytest.approx(0.0, abs=1e-9)
    assert fit["sigma"] == pytest.approx(1.0 / np.sqrt(3.0), abs=1e-9)


def test_fit_cauchy_pca_shapes_and_orthogonality(elongated):
    res = cpca.fit_cauchy_pca(elongated, k=2, seed=3)
    d = res["directions"]
    assert d.shape == (2, 3)
    assert np.allclose(d @ d.T, np.eye(2), atol=1e-8)
    assert all(res["converged"])
    assert cpca.angle_degrees(d[0], np.array([1.0, 0.0, 0.0])) < 20.0
    assert np.all(np.asarray(res["sigma"]) > 0.0)


def test_classical_first_pc(elongated):
    lead = cpca.classical_first_pc(elongated)
    assert lead["eigenvalue"] > 0.0
    assert np.linalg.norm(lead["direction"]) == pytest.approx(1.0, abs=1e-12)


def test_pp_first_pc_tracks_the_long_axis(elongated):
    u = cpca.pp_first_pc(elongated, seed=5)
    assert cpca.angle_degrees(u, np.array([1.0, 0.0, 0.0])) < 25.0


def test_prepare_centers_columns(elongated):
    prep = cpca.prepare(elongated, center="column", scale="mad")
    assert np.allclose(np.median(prep["prepped"], axis=0), 0.0, atol=0.2)
    assert prep["scales"].shape == (3,)


def test_influence_analytic_matches_empirical(elongated):
    z = np.array([8.0, 3.0, -1.0])
    analytic = cpca.cauchy_if(z, elongated)
    assert not analytic["singular_a"]
    assert not analytic["singular_fisher"]
    empirical = cpca.empirical_if(z, elongated, estimator="cauchy", eps=0.02)
    gap = np.linalg.norm(analytic["if_vector"] - empirical) / np.linalg.norm(empirical)
    assert gap <= 0.05


def test_classical_if_orthogonal_to_direction(elongated):
    sigma = np.cov(elongated.T, bias=True)
    mu = elongated.mean(axis=0)
    lead = cpca.classical_first_pc(elongated)
    r = cpca.classical_if(np.array([5.0, 2.0, 1.0]), sigma, mu)
    assert abs(np.dot(r["if_vector"], lead["direction"])) <= 1e-8


def test_run_scenario_deterministic():
    kwargs = dict(n=40, p=4, kappa=6.0, phi_degrees=45.0, contamination=0.05,
                  reps=3, seed=11)
    a = cpca.run_scenario(**kwargs, threads=1)
    b = cpca.run_scenario(**kwargs, threads=4)
    assert a["reps_used"] == 3
    assert a["reps_failed"] == 0
    for key in ("mean_angle_cauchy", "mean_angle_pp", "mean_angle_classical"):
        assert a[key] == b[key]
        assert 0.0 <= a[key] <= 90.0


def test_validation_errors_are_python_exceptions(elongated):
    with pytest.raises(ValueError):
        cpca.fit_cauchy_pca(elongated, k=0)
    with pytest.raises(ValueError):
        cpca.run_scenario(n=2, p=3, reps=1)
    rank1 = np.outer(np.arange(1.0, 5.0), np.array([1.0, 2.0]))
    with pytest.raises(cpca.CpcaError):
        cpca.fit_cauchy_pca(rank1, k=2)
