import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from hypcascade import cascade, hypgeo
from hypcascade.cascade import DirectionPolicy, ModelParams


def run_for(params, index=0):
    return cascade.build_cascade(params, cascade.replication_stream(params.seed, index))


def with_events(params, min_events, start=0):
    for r in range(start, start + 10_000):
        run = run_for(params, r)
        if run.n_events >= min_events:
            return run, r
    raise AssertionError("no run with enough events")


def test_params_validation_and_dict():
    p = ModelParams(1.0, 2.0, 3.0, seed=5, reps=10, direction_policy="alt", path_dt=0.05)
    assert p.direction_policy is DirectionPolicy.ALTERNATING
    assert ModelParams.from_dict(p.to_dict()) == p
    assert p.to_dict()["lambda"] == 2.0
    for bad in [dict(c=0), dict(lam=-1), dict(horizon=0), dict(reps=0), dict(path_dt=0), dict(seed=-1)]:
        kw = dict(c=1.0, lam=1.0, horizon=1.0)
        kw.update(bad)
        with pytest.raises(ValueError):
            ModelParams(**kw)


def test_policy_parse():
    assert DirectionPolicy.parse("clockwise") is DirectionPolicy.CLOCKWISE
    assert DirectionPolicy.parse("CCW") is DirectionPolicy.COUNTERCLOCKWISE
    with pytest.raises(ValueError):
        DirectionPolicy.parse("sideways")


def test_no_events_without_rate():
    for r in range(20):
        assert cascade.sample_event_times(0.0, 5.0, cascade.replication_stream(1, r)) == ()


def test_event_times_ordered_inside_horizon():
    for r in range(200):
        ts = cascade.sample_event_times(4.0, 2.0, cascade.replication_stream(3, r))
        assert all(0 < a < b for a, b in zip(ts, ts[1:]))
        assert all(0 < s < 2.0 for s in ts)


def test_event_count_mean():
    counts = np.array([len(cascade.sample_event_times(2.0, 3.0, cascade.replication_stream(17, r)))
                       for r in range(100_000)])
    se = counts.std(ddof=1) / math.sqrt(len(counts))
    assert abs(counts.mean() - 6.0) <= 3.5 * se


def test_conditional_uniform_order_statistics():
    n, t = 3, 2.0
    firsts = []
    r = 0
    while len(firsts) < 3000:
        ts = cascade.sample_event_times(1.5, t, cascade.replication_stream(23, r))
        if len(ts) == n:
            firsts.append(ts[0] / t)
        r += 1
    assert stats.kstest(firsts, stats.beta(1, n).cdf).pvalue > 1e-3


def test_streams_are_reproducible_and_distinct():
    a = cascade.sample_event_times(3.0, 2.0, cascade.replication_stream(9, 4))
    b = cascade.sample_event_times(3.0, 2.0, cascade.replication_stream(9, 4))
    c = cascade.sample_event_times(3.0, 2.0, cascade.replication_stream(9, 5))
    assert a == b and a != c


def test_splinter_distance_examples():
    c, t = 0.8, 2.0
    ts = (0.5, 1.1, 1.7)
    assert cascade.cosh_eta_splinter(ts, 0, t, c) == pytest.approx(math.cosh(c * t), rel=1e-15)
    assert cascade.cosh_eta_splinter(ts[:1], 1, t, c) == pytest.approx(math.cosh(0.4) * math.cosh(c * 1.5), rel=1e-15)
    k = 3
    eq = tuple(t * j / (k + 1) for j in range(1, k + 1))
    assert cascade.cosh_eta_splinter(eq, k, t, c) == pytest.approx(math.cosh(c * t / (k + 1)) ** (k + 1), rel=1e-14)
    with pytest.raises(IndexError):
        cascade.cosh_eta_splinter(ts, 4, t, c)
    with pytest.raises(IndexError):
        cascade.log_cosh_eta_splinter(ts, -1, t, c)


def test_one_pass_matches_per_splinter():
    ts = (0.2, 0.9, 1.0, 1.6)
    all_ = cascade.splinter_cosh_etas(ts, 2.0, 1.3)
    for k, v in enumerate(all_):
        assert v == pytest.approx(cascade.cosh_eta_splinter(ts, k, 2.0, 1.3), rel=1e-15)


@given(st.lists(st.floats(0.001, 0.999), max_size=6, unique=True), st.floats(0.1, 3), st.data())
def test_splinter_distance_monotone_in_t(fracs, c, data):
    ts = tuple(sorted(fracs))
    k = data.draw(st.integers(0, len(ts)))
    prev = 0.0
    for t in (1.0, 1.5, 2.0, 4.0):
        v = cascade.cosh_eta_splinter(ts, k, t, c)
        assert v >= 1 and v >= prev
        prev = v


def test_log_scale_path():
    ts = (10.0, 100.0, 250.0)
    t, c = 400.0, 1.0
    big = cascade.cosh_eta_splinter(ts, 2, t, c)
    logv = cascade.log_cosh_eta_splinter(ts, 2, t, c)
    assert math.log(big) == pytest.approx(logv, rel=1e-14)
    run = run_for(ModelParams(1.0, 0.0, 800.0))
    assert run.log_cosh_eta_cm == pytest.approx(800 - math.log(2), rel=1e-15)
    assert run.cosh_eta_cm == math.inf
    run = run_for(ModelParams(1.0, 0.02, 800.0, seed=2))
    assert run.n_events > 0
    assert 400 < run.log_cosh_eta_cm <= 800


def test_zero_event_run():
    p = ModelParams(1.3, 0.0, 1.7)
    run = run_for(p)
    assert run.n_events == 0 and len(run.splinters) == 1
    s = run.splinters[0]
    assert s.mass == 1 and run.cosh_eta_cm == math.cosh(1.3 * 1.7)
    assert cascade.cosh_eta_cm(run) == s.cosh_eta


def test_two_splinter_center_of_mass():
    p = ModelParams(1.0, 1.0, 1.0, seed=4)
    for r in range(500):
        run = run_for(p, r)
        if run.n_events == 1:
            s1 = run.events[0]
            expect = 0.5 * math.cosh(1.0) + 0.5 * math.cosh(s1) * math.cosh(1.0 - s1)
            assert run.cosh_eta_cm == pytest.approx(expect, rel=1e-15)
            return
    raise AssertionError("no single-event run found")


@pytest.mark.parametrize("policy", list(DirectionPolicy))
def test_masses_frames_and_recomputation(policy):
    p = ModelParams(1.0, 3.0, 1.5, seed=8, direction_policy=policy)
    for r in range(300):
        run = run_for(p, r)
        n = run.n_events
        assert len(run.splinters) == n + 1
        masses = [s.mass for s in run.splinters]
        assert masses == [2.0 ** -(k + 1) for k in range(n)] + [2.0 ** -n]
        assert abs(math.fsum(masses) - 1) <= 1e-15
        assert cascade.cosh_eta_cm(run) == run.cosh_eta_cm
        assert run.cosh_eta_cm >= 1
        for s in run.splinters:
            assert s.cosh_eta >= 1
            assert hypgeo.cosh_dist_origin(s.frame.base_point()) == pytest.approx(s.cosh_eta, rel=1e-9)


def test_distances_do_not_depend_on_policy():
    base = ModelParams(1.0, 2.5, 2.0, seed=12)
    for r in range(50):
        runs = [run_for(dataclasses.replace(base, direction_policy=pol), r) for pol in DirectionPolicy]
        first = runs[0]
        for other in runs[1:]:
            assert other.events == first.events
            assert [s.cosh_eta for s in other.splinters] == [s.cosh_eta for s in first.splinters]


def test_clockwise_counterclockwise_mirror():
    base = ModelParams(1.0, 2.0, 2.0, seed=21, path_dt=0.02)
    run, r = with_events(base, 3)
    cw = run_for(dataclasses.replace(base, direction_policy="cw"), r)
    ccw = run_for(dataclasses.replace(base, direction_policy="ccw"), r)
    for (a, _), (b, _) in zip(cascade.sample_trajectories(cw), cascade.sample_trajectories(ccw)):
        assert np.allclose(a[:, 0], -b[:, 0], atol=1e-9, rtol=0)
        assert np.allclose(a[:, 1], b[:, 1], atol=1e-9, rtol=0)


def test_clockwise_root_moves_right():
    run = run_for(ModelParams(1.0, 0.0, 1.0, direction_policy="cw"))
    xy, _ = cascade.sample_trajectories(run)[0]
    assert np.all(np.diff(xy[:, 0]) > 0)


def test_zero_event_trajectory_is_main_geodesic():
    c, t = 1.2, 2.0
    run = run_for(ModelParams(c, 0.0, t, path_dt=0.01, direction_policy="cw"))
    xy, uv = cascade.sample_trajectories(run)[0]
    tau = np.linspace(0, t, len(xy))
    assert np.allclose(xy, np.column_stack([np.tanh(c * tau), 1 / np.cosh(c * tau)]), atol=1e-10, rtol=0)
    for (x, y), ct in zip(xy, c * tau):
        assert (x, y) == pytest.approx(hypgeo.from_polar((ct, 0.0)), abs=1e-10)
    assert np.allclose(uv[:, 1], 0, atol=1e-12)


@pytest.mark.parametrize("policy", list(DirectionPolicy))
def test_trajectories_end_at_frames(policy):
    p = ModelParams(0.9, 3.0, 2.0, seed=31, path_dt=0.05, direction_policy=policy)
    run, _ = with_events(p, 2)
    trajs = cascade.sample_trajectories(run)
    assert len(trajs) == run.n_events + 1
    for (xy, uv), s in zip(trajs, run.splinters):
        assert np.all(xy[:, 1] > 0)
        assert np.all(np.sum(uv ** 2, axis=1) < 1)
        assert xy[0] == pytest.approx((0, 1), abs=1e-15)
        assert xy[-1] == pytest.approx(tuple(s.frame.base_point()), abs=1e-9)
        d = [hypgeo.cosh_dist_origin(p) for p in xy]
        assert d[-1] == pytest.approx(s.cosh_eta, rel=1e-9)


def test_replicate_order_independent_of_workers():
    p = ModelParams(1.0, 2.0, 1.0, seed=99, reps=500)

    def stat(ts):
        return cascade.distances_from_times(ts, 1.0, 1.0)[2]

    one = cascade.replicate(p, stat, workers=1)
    four = cascade.replicate(p, stat, workers=4)
    assert one == four
    tail = cascade.replicate(dataclasses.replace(p, reps=100), stat, start=400)
    assert tail == one[400:]


def test_simulate_deterministic_across_workers():
    p = ModelParams(1.0, 2.0, 1.0, seed=5, reps=60)
    assert cascade.simulate(p, 1) == cascade.simulate(p, 3)
    runs = cascade.simulate(p)
    assert runs[7] == run_for(p, 7)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 2), st.floats(0, 4), st.floats(0.05, 2), st.integers(0, 2 ** 64 - 1),
       st.sampled_from(list(DirectionPolicy)))
def test_frame_distances_property(c, lam, t, seed, policy):
    run = run_for(ModelParams(c, lam, t, seed=seed, direction_policy=policy))
    for s in run.splinters:
        assert hypgeo.cosh_dist_origin(s.frame.base_point()) == pytest.approx(s.cosh_eta, rel=1e-9)


@pytest.mark.parametrize("t", [20.0, 100.0, 290.0])
def test_frames_stay_accurate_far_out(t):
    p = ModelParams(1.0, 1.0, t, seed=3)
    for r in range(20):
        for s in run_for(p, r).splinters:
            assert hypgeo.cosh_dist_origin(s.frame.base_point()) == pytest.approx(s.cosh_eta, rel=1e-11)


def test_frames_omitted_beyond_threshold():
    run = run_for(ModelParams(1.0, 0.5, 400.0, seed=3))
    assert all(s.frame is None for s in run.splinters)
    with pytest.raises(ValueError):
        cascade.sample_trajectories(run)
