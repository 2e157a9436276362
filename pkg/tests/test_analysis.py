import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cute.analysis import (ClosedNetworkModel, Duplex, PowerCurvePoint,
                           QueueCountSpec,
                           mva_closed, optimal_population, power, power_curve,
                           queue_count, satellite_pipe_size,
                           terrestrial_pipe_size)


def ctmc_throughput(service_times, customers):
    """Exact cyclic-network throughput from the full Markov chain.

    States are placements of the customers over the queues; each busy
    queue k moves one customer to queue k+1 at rate 1/s_k.
    """
    k = len(service_times)
    states = [s for s in itertools.product(range(customers + 1), repeat=k)
              if sum(s) == customers]
    index = {s: i for i, s in enumerate(states)}
    q = np.zeros((len(states), len(states)))
    for s in states:
        for j in range(k):
            if s[j]:
                t = list(s)
                t[j] -= 1
                t[(j + 1) % k] += 1
                rate = 1.0 / service_times[j]
                q[index[s], index[tuple(t)]] += rate
                q[index[s], index[s]] -= rate
    a = np.vstack([q.T, np.ones(len(states))])
    b = np.zeros(len(states) + 1)
    b[-1] = 1.0
    pi = np.linalg.lstsq(a, b, rcond=None)[0]
    # throughput = completion rate at queue 0
    busy0 = sum(p for s, p in zip(states, pi) if s[0])
    return busy0 / service_times[0]


def test_identical_queues_example():
    x, r = mva_closed(ClosedNetworkModel.identical(4), 3)
    assert x == pytest.approx(0.5, abs=1e-12)
    assert r == pytest.approx(6.0, abs=1e-12)


def test_single_customer_sees_no_queueing():
    assert mva_closed(ClosedNetworkModel([1, 1]), 1) == (0.5, 2.0)
    model = ClosedNetworkModel([0.3, 2.0, 1.1])
    assert mva_closed(model, 1)[1] == pytest.approx(3.4)


@pytest.mark.parametrize("times, customers", [
    ((1, 2, 1), 1), ((1, 2, 1), 3), ((1, 2, 1), 5),
    ((0.5, 4.0), 4), ((1.5, 0.7, 2.2, 3.0), 3),
])
def test_mva_matches_markov_chain(times, customers):
    x, r = mva_closed(ClosedNetworkModel(times), customers)
    assert x == pytest.approx(ctmc_throughput(times, customers), rel=1e-9)
    assert r == pytest.approx(customers / x, rel=1e-12)


@pytest.mark.parametrize("bad", [[1.0], [1.0, 0.0], [1.0, -2.0]])
def test_model_invariants(bad):
    with pytest.raises(ValueError):
        ClosedNetworkModel(bad)


def test_zero_customers_rejected():
    with pytest.raises(ValueError):
        mva_closed(ClosedNetworkModel.identical(3), 0)


def test_power():
    assert power(0.5, 6) == pytest.approx(1 / 12)
    assert power(1, 1) == 1
    with pytest.raises(ValueError):
        power(0, 1)
    with pytest.raises(ValueError):
        power(1, -1)


@pytest.mark.parametrize("n", [1, 3, 7])
def test_identical_power_closed_form(n):
    for p in power_curve(ClosedNetworkModel.identical(n + 1), 3 * n):
        c = p.customers
        assert p.power == pytest.approx(c / (n + c) ** 2, abs=1e-12)
        assert p.power == p.throughput / p.response


@pytest.mark.parametrize("queues, c_max, expected", [(4, 20, 3), (11, 40, 10)])
def test_optimal_population_identical(queues, c_max, expected):
    assert optimal_population(ClosedNetworkModel.identical(queues),
                              c_max) == expected


def test_optimal_population_heterogeneous_brute_force():
    times = (1, 2, 1)
    powers = {}
    for c in range(1, 21):
        x = ctmc_throughput(times, c)
        powers[c] = x / (c / x)
    brute = max(powers, key=lambda c: (powers[c], -c))
    assert brute <= 2
    assert optimal_population(ClosedNetworkModel(times), 20) == brute


def test_optimal_population_prefers_fewer_customers_on_ties(monkeypatch):
    import cute.analysis as analysis
    tied = [PowerCurvePoint(c, 1.0, 1.0, p)
            for c, p in [(1, 0.1), (2, 0.3), (3, 0.3), (4, 0.2)]]
    monkeypatch.setattr(analysis, "power_curve", lambda model, c_max: tied)
    assert analysis.optimal_population(ClosedNetworkModel.identical(3), 4) == 2


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.1, 5.0), min_size=2, max_size=6),
       st.integers(1, 25))
def test_monotone_and_bottleneck_bound(times, c_max):
    points = power_curve(ClosedNetworkModel(times), c_max)
    for a, b in zip(points, points[1:]):
        assert b.throughput > a.throughput
        assert b.response > a.response
    for p in points:
        assert p.throughput <= 1 / max(times) + 1e-12
        assert p.response >= sum(times) - 1e-9


@pytest.mark.parametrize("n", range(1, 51))
def test_power_unimodal(n):
    powers = [p.power for p in power_curve(ClosedNetworkModel.identical(n + 1),
                                           3 * n)]
    peak = powers.index(max(powers))
    assert peak == n - 1
    assert all(a < b for a, b in zip(powers[:peak], powers[1:peak + 1]))
    assert all(a > b for a, b in zip(powers[peak:], powers[peak + 1:]))


@pytest.mark.parametrize("spec, expected", [
    (QueueCountSpec(4), 13),
    (QueueCountSpec(4, Duplex.HALF), 9),
    (QueueCountSpec(4, cpu_queueing=False), 9),
    (QueueCountSpec(4, acks_present=False), 9),
    (QueueCountSpec(4, Duplex.HALF, acks_present=False), 9),
    (QueueCountSpec(1, Duplex.HALF, cpu_queueing=False), 2),
    (QueueCountSpec(3, cpu_queueing=False, acks_present=False), 4),
])
def test_queue_count(spec, expected):
    assert queue_count(spec) == expected


@pytest.mark.parametrize("h", range(1, 30))
def test_full_minus_half_duplex_is_h(h):
    full = queue_count(QueueCountSpec(h))
    half = queue_count(QueueCountSpec(h, Duplex.HALF))
    assert full - half == h
    assert queue_count(QueueCountSpec(h, Duplex.HALF, False, False)) >= h


def test_queue_count_spec_invariant():
    with pytest.raises(ValueError):
        QueueCountSpec(0)


def test_terrestrial_pipe_size():
    assert terrestrial_pipe_size(4) == 12
    assert terrestrial_pipe_size(1) == 3
    with pytest.raises(ValueError):
        terrestrial_pipe_size(0)


@pytest.mark.parametrize("h", range(1, 9))
def test_pipe_size_is_power_optimum(h):
    model = ClosedNetworkModel.identical(3 * h + 1)
    assert optimal_population(model, 12 * h) == terrestrial_pipe_size(h)


@pytest.mark.parametrize("delay, bottleneck, expected", [
    (600, 50, 12), (7.5, 7.5, 1), (100, 40, 3), (0.6, 0.05, 12), (99, 40, 2),
])
def test_satellite_pipe_size(delay, bottleneck, expected):
    assert satellite_pipe_size(delay, bottleneck) == expected


@pytest.mark.parametrize("delay, bottleneck", [(0, 1), (1, 0), (-1, 1),
                                               (1, 2)])
def test_satellite_pipe_size_errors(delay, bottleneck):
    with pytest.raises(ValueError):
        satellite_pipe_size(delay, bottleneck)
