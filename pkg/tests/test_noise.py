import numpy as np
import pytest
from pydantic import ValidationError

from fracback.errors import ParameterValidationError
from fracback.noise import (
    NoiseSampler,
    NoiseSpec,
    Purpose,
    brownian_paths,
    noise_stream,
    observe_coefficient,
    observe_final,
    observe_source,
    write_observed_csv,
)
from fracback.spectral import GridSamples


def zero_samples(n):
    return GridSamples(n=n, values=np.zeros(n))


def test_final_noise_has_declared_deviation():
    noisy = observe_final(zero_samples(2000), NoiseSpec(sigma=0.1, v_max=0.2, seed=1))
    assert 0.094 <= np.std(noisy.values) <= 0.106


def test_zero_noise_returns_truth():
    truth = GridSamples(n=4, values=np.array([1.0, 2.0, 3.0, 4.0]))
    assert np.array_equal(observe_final(truth, NoiseSpec()).values, truth.values)
    grid = np.linspace(0.0, 1.0, 5)
    source = np.ones((5, 4))
    assert np.array_equal(observe_source(source, NoiseSpec(), grid), source)


def test_brownian_variance_at_half():
    grid = np.linspace(0.0, 1.0, 11)
    paths = brownian_paths(noise_stream(3, Purpose.SOURCE, 0), grid, 5000)
    assert np.all(paths[0] == 0.0)
    assert 0.47 <= np.mean(paths[5] ** 2) <= 0.53


def test_brownian_paths_are_independent():
    grid = np.linspace(0.0, 1.0, 11)
    paths = brownian_paths(noise_stream(4, Purpose.SOURCE, 0), grid, 10000)
    correlation = np.corrcoef(paths[-1, :5000], paths[-1, 5000:])[0, 1]
    assert abs(correlation) <= 0.05


def test_coefficient_noise_variance():
    grid = np.linspace(0.0, 1.0, 11)
    spec = NoiseSpec(eps=0.2, seed=9)
    a = np.ones(grid.size)
    deviations = np.array([
        observe_coefficient(a, spec, grid, a0=10.0, trial=trial).path[-1] - 1.0 for trial in range(5000)
    ])
    assert 0.036 <= np.mean(deviations**2) <= 0.044


def test_coefficient_path_starts_at_truth():
    grid = np.linspace(0.0, 1.0, 11)
    observation = observe_coefficient(np.full(grid.size, 0.7), NoiseSpec(eps=0.3, seed=2), grid, a0=10.0)
    assert observation.path[0] == 0.7


def test_coefficient_outside_bounds_is_flagged():
    grid = np.linspace(0.0, 1.0, 101)
    observation = observe_coefficient(np.ones(grid.size), NoiseSpec(eps=20.0, seed=2), grid, a0=1.0)
    assert not observation.within_bounds
    assert observation.b0 == pytest.approx(float(np.min(1.0 - observation.path)))


def test_exact_coefficient_within_bounds():
    grid = np.linspace(0.0, 1.0, 11)
    observation = observe_coefficient(np.ones(grid.size), NoiseSpec(), grid, a0=1.5)
    assert observation.within_bounds
    assert observation.b0 == pytest.approx(0.5)


def test_streams_are_keyed_by_purpose_and_trial():
    truth = zero_samples(32)
    first = observe_final(truth, NoiseSpec(sigma=0.1, v_max=0.2, seed=5), trial=3)
    with_source_noise = observe_final(truth, NoiseSpec(sigma=0.1, v_max=0.2, vartheta=0.5, seed=5), trial=3)
    other_trial = observe_final(truth, NoiseSpec(sigma=0.1, v_max=0.2, seed=5), trial=4)
    other_seed = observe_final(truth, NoiseSpec(sigma=0.1, v_max=0.2, seed=6), trial=3)
    assert np.array_equal(first.values, with_source_noise.values)
    assert not np.array_equal(first.values, other_trial.values)
    assert not np.array_equal(first.values, other_seed.values)


def test_sampler_bundles_all_observations():
    grid = np.linspace(0.0, 0.5, 6)
    spec = NoiseSpec(sigma=0.05, v_max=0.1, vartheta=0.1, eps=0.01, seed=8)
    data = NoiseSampler(spec).observe(zero_samples(8), np.zeros((6, 8)), np.ones(6), grid, 2.0, trial=1)
    assert data.n == 8
    assert data.source_paths.shape == (6, 8)
    assert np.all(data.source_paths[0] == 0.0)
    assert data.coefficient.path.shape == (6,)


def test_per_node_deviations():
    spec = NoiseSpec(sigma=[0.0, 0.1, 0.0], v_max=0.2, seed=1)
    noisy = observe_final(zero_samples(3), spec)
    assert noisy.values[0] == 0.0 and noisy.values[2] == 0.0
    assert noisy.values[1] != 0.0
    with pytest.raises(ParameterValidationError):
        observe_final(zero_samples(4), spec)


def test_spec_validation():
    with pytest.raises(ValidationError):
        NoiseSpec(sigma=0.2, v_max=0.2)
    with pytest.raises(ValidationError):
        NoiseSpec(eps=-1.0)
    assert NoiseSpec().noise_free
    assert not NoiseSpec(eps=0.1).noise_free


def test_source_shape_must_match_grid():
    with pytest.raises(ParameterValidationError):
        observe_source(np.zeros((3, 4)), NoiseSpec(vartheta=0.1), np.linspace(0.0, 1.0, 5))


def test_observed_csv(tmp_path):
    grid = np.linspace(0.0, 1.0, 3)
    spec = NoiseSpec(seed=7)
    data = NoiseSampler(spec).observe(zero_samples(2), np.zeros((3, 2)), np.ones(3), grid, 1.0, trial=2)
    lines = write_observed_csv(data, spec, 2, tmp_path / "observed.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("# seed=7 trial=2 spec=")
    assert lines[1] == "series,k,t,value"
    assert lines[2] == "final,1,1.0,0.0"
    assert len(lines) == 2 + 2 + 3 * 2 + 3
