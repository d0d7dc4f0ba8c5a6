import math

import numpy as np
import pytest

import banditlab.bandits as bd
import banditlab.instances as inst
import banditlab.spaces as sps
from banditlab.errors import ValidationError


def _convergent_peak(noise="none"):
    space = sps.ConvergentSpace(100)
    return space, inst.PeakInstance(space, 0.0, 0.5, c=0.9, noise=noise)


# ---------------------------------------------------------------------------
# exploration sweeps


def test_expl_budget_accounting():
    space, instance = _convergent_peak()
    run = bd.ExplRun(space, 11, 5, 0.04)
    assert len(run.queue) == 11 * 5
    pulls = 0
    while not run.finished:
        run.record(instance.mean(run.next_point()))
        pulls += 1
    assert pulls == 55


def test_expl_zero_noise_finds_optimum():
    space, instance = _convergent_peak()
    winner = bd.expl(space, 11, 5, 0.001, instance.mean)
    assert winner == 0.0


def test_expl_loser_rule_keeps_optimal_point():
    space, instance = _convergent_peak()
    run = bd.ExplRun(space, 11, 1, 0.001)
    while not run.finished:
        run.record(instance.mean(run.next_point()))
    avg = run.averages()
    best = max(avg.values())
    threshold = 2 * run.r + run.delta
    assert best - avg[0.0] <= threshold  # optimal point survives
    assert run.result() == 0.0


def test_expl_no_losers_at_large_radius():
    space, instance = _convergent_peak()
    # r >= 1 makes every covering point a non-loser; the well-order decides
    winner = bd.expl(space, 11, 1, 2.0, instance.mean)
    assert winner == 0.0


def test_expl_prime_prefers_higher_rank():
    space, instance = _convergent_peak()
    winner = bd.expl_prime(space, 11, 5, 0.001, instance.mean)
    assert winner == 0.0


def test_expl_prime_covers_every_rank():
    space = sps.NestedConvergentSpace(5, 5)
    run = bd.ExplPrimeRun(space, 4, 1, 0.5)
    ranks = set(run.rank_of.values())
    assert ranks == {0, 1, 2}


def test_expl_parameter_validation():
    space, _ = _convergent_peak()
    with pytest.raises(ValidationError):
        bd.ExplRun(space, 0, 1, 0.1)
    with pytest.raises(ValidationError):
        bd.ExplRun(space, 1, 1, 0.0)


# ---------------------------------------------------------------------------
# phase schedules


def test_phase_lengths_doubly_exponential():
    space, instance = _convergent_peak()
    session = bd.well_ordered_bandit(space)
    rng = np.random.default_rng(0)
    for _ in range(4 + 16 + 256 + 10):
        x = session.choose()
        session.observe(instance.bandit_reward(x, rng))
    lengths = [p["length"] for p in session.info["phases"]]
    assert lengths == [2 ** 2, 2 ** 4, 2 ** 8, 2 ** 16]


def test_well_ordered_bandit_zero_noise_commits_to_peak():
    space, instance = _convergent_peak()
    session = bd.well_ordered_bandit(space)
    for _ in range(2 ** 10):
        x = session.choose()
        session.observe(instance.mean(x))
    completed = [p for p in session.info["phases"] if p["completed"]]
    assert completed and all(p["commit"] == 0.0 for p in completed[1:])


def test_f_preset_registry():
    space, _ = _convergent_peak()
    bd.well_ordered_bandit(space, "log_power:2")
    bd.well_ordered_bandit(space, "loglog")
    bd.well_ordered_bandit(space, lambda t: math.log(t))
    with pytest.raises(ValidationError):
        bd.well_ordered_bandit(space, "nope")


def test_cb_bandit_on_convergent():
    space, instance = _convergent_peak()
    session = bd.cb_bandit(space)
    for _ in range(300):
        x = session.choose()
        session.observe(instance.mean(x))
    completed = [p for p in session.info["phases"] if p["completed"]]
    assert completed and completed[-1]["commit"] == 0.0


# ---------------------------------------------------------------------------
# UCB1


def test_ucb1_single_arm():
    s = bd.ucb1(["only"])
    for _ in range(20):
        assert s.choose() == "only"
        s.observe(1.0)


def test_ucb1_zero_noise_separation():
    s = bd.ucb1([0, 1])
    means = [0.2, 0.8]
    picks = []
    for _ in range(4096):
        a = s.choose()
        picks.append(a)
        s.observe(means[a])
    # deterministic index trace: arm 0 is pulled only logarithmically often
    n0 = picks.count(0)
    assert n0 <= math.ceil(2 * math.log(4096) / 0.6 ** 2) + 2
    assert picks[-1] == 1


def test_ucb1_replay_deterministic():
    def run():
        s = bd.ucb1([0, 1])
        rng = np.random.default_rng(5)
        out = []
        for _ in range(500):
            a = s.choose()
            out.append(a)
            s.observe(float(rng.random() < (0.5, 0.6)[a]))
        return out

    assert run() == run()


def test_observe_before_choose_rejected():
    s = bd.ucb1([0])
    with pytest.raises(ValidationError):
        s.observe(1.0)


# ---------------------------------------------------------------------------
# phased UCB1


def test_phased_ucb1_schedule_matches_closed_form():
    space = sps.IntervalSpace()
    session = bd.phased_ucb1(space)
    instance = inst.PeakInstance(space, 0.8, 1.0, c=0.9, noise="none")
    for _ in range(2 ** 12):
        x = session.choose()
        session.observe(instance.mean(x))
    # interval net at radius 2^-k has 2^(k-1) points
    def tstar(k):
        n = 2 ** (k - 1)
        return 2.0 * n * 4.0 ** k * math.log(n * 4.0 ** k)

    lengths = []
    for p in session.info["phases"]:
        k = p["phase"]
        assert p["net_size"] == 2 ** (k - 1)
        assert p["eps"] == 2.0 ** -k
        expected = math.ceil(max(tstar(k), tstar(k + 1), 2 * sum(lengths)))
        assert p["length"] == expected
        lengths.append(expected)


def test_phased_ucb1_saturates_on_finite_space():
    space = sps.FiniteSpace([0.0, 0.5, 1.0])
    session = bd.phased_ucb1(space)
    means = {0.0: 0.2, 0.5: 0.9, 1.0: 0.4}
    for _ in range(3000):
        x = session.choose()
        session.observe(means[x])
    phases = session.info["phases"]
    assert any(p["saturated"] for p in phases)
    sat = [p for p in phases if p["saturated"]]
    assert all(p["net_size"] == 3 for p in sat)


# ---------------------------------------------------------------------------
# completion adapter


def test_dyadic_rounding_contract():
    rounding = bd.dyadic_rounding(20)
    rng = np.random.default_rng(3)
    for t in range(1, 21):
        for x in rng.random(20):
            assert abs(rounding(float(x), t) - x) <= 2.0 ** -t
    # beyond the resolution the grid stalls
    assert rounding(0.3, 25) == rounding(0.3, 20)


def test_completion_adapter_identity_on_binary_rewards():
    space = sps.FiniteSpace([0.0, 1.0])
    means = {0.0: 0.0, 1.0: 1.0}

    def run(session):
        out = []
        for _ in range(200):
            x = session.choose()
            out.append(x)
            session.observe(means[x])
        return out

    plain = run(bd.ucb1([0.0, 1.0]))
    adapted = run(bd.completion_adapter(
        bd.ucb1([0.0, 1.0]), bd.identity_rounding,
        np.random.default_rng(0)))
    assert plain == adapted


def test_completion_adapter_mean_preserving():
    class Recorder(bd.Session):
        def __init__(self):
            super().__init__()
            self.feedback = []

        def _run(self):
            while True:
                v = yield 0.0
                self.feedback.append(v)

    rec = Recorder()
    adapter = bd.completion_adapter(rec, bd.identity_rounding,
                                    np.random.default_rng(1))
    for _ in range(20000):
        adapter.choose()
        adapter.observe(0.73)
    vals = np.array(rec.feedback)
    assert set(np.unique(vals)) <= {0.0, 1.0}
    assert abs(vals.mean() - 0.73) <= 3 * 0.45 / math.sqrt(len(vals))


def test_completion_adapter_rounds_actions():
    space = sps.IntervalSpace(well_order="coordinate")
    inner = bd.well_ordered_bandit(space)
    adapter = bd.completion_adapter(inner, bd.dyadic_rounding(20),
                                    np.random.default_rng(0))
    rng = np.random.default_rng(2)
    for t in range(1, 50):
        x = adapter.choose()
        assert abs(x - inner.choose()) <= 2.0 ** -t
        adapter.observe(float(rng.random() < 0.5))
