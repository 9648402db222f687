import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from camwake.simcore import (ACTIVE, SLEEP, EnergyLedger, EnergyModelParams, PlatformState, TimeBase,
                             accumulate, admissible_inputs, receiver_energy, step_energy, transition)

TABLE = EnergyModelParams()


def test_timebase_relation():
    tb = TimeBase()
    assert tb.t_rf == tb.nu * tb.t_c
    assert tb.horizon == pytest.approx(50.0)
    assert tb.n_frames == 5000
    assert tb.is_rf_instant(0.1) and tb.is_rf_instant(0.0)
    assert not tb.is_rf_instant(0.05)
    assert tb.frame_index(0.013) is None


@pytest.mark.parametrize("kw", [dict(t_rf=0.0), dict(nu=0), dict(nu=2.5), dict(n_test=0)])
def test_timebase_rejects_bad_values(kw):
    with pytest.raises(ValueError):
        TimeBase(**kw)


def test_admissible_inputs():
    assert admissible_inputs(PlatformState(SLEEP)) == {0, 1}
    assert admissible_inputs(PlatformState(ACTIVE)) == {0, -1}


@pytest.mark.parametrize("mode, u, expected", [(0, 1, 1), (1, -1, 0), (1, 0, 1), (0, 0, 0)])
def test_transition(mode, u, expected):
    assert transition(PlatformState(mode), u).mode == expected


@pytest.mark.parametrize("mode, u", [(0, -1), (1, 1), (0, 2)])
def test_transition_rejects_inadmissible(mode, u):
    with pytest.raises(ValueError):
        transition(PlatformState(mode), u)


@given(st.lists(st.booleans(), max_size=200))
def test_mode_stays_binary_and_counts_transitions(flips):
    s = PlatformState(SLEEP)
    changes = 0
    for flip in flips:
        u = (1 if s.mode == SLEEP else -1) if flip else 0
        changes += u != 0
        s = transition(s, u)
        assert s.mode in (0, 1)
    assert changes == sum(flips)


@pytest.mark.parametrize("new, old, expected", [
    (1, 0, 0.1 * (0.1 + 0.1) + 0.05 * 0.003),
    (0, 0, 0.1 * 0.001),
    (1, 1, 0.02),
])
def test_step_energy_table_values(new, old, expected):
    assert step_energy(TABLE, PlatformState(new), PlatformState(old), 0.1) == pytest.approx(expected, abs=1e-15)


def test_step_energy_worked_numbers():
    assert step_energy(TABLE, PlatformState(1), PlatformState(0), 0.1) == pytest.approx(0.02015)
    assert step_energy(TABLE, PlatformState(0), PlatformState(0), 0.1) == pytest.approx(0.0001)


def test_step_energy_negative_interval():
    with pytest.raises(ValueError):
        step_energy(TABLE, PlatformState(1), PlatformState(1), -0.1)


def test_energy_params_validation():
    with pytest.raises(ValueError):
        EnergyModelParams(p_sleep=0.2)
    with pytest.raises(ValueError):
        EnergyModelParams(p_rx=0.0)
    assert TABLE.e_trans == pytest.approx(1.5e-4)
    assert TABLE.e_max(0.1) == pytest.approx(0.02015)


def test_accumulate_single():
    ledger = accumulate(EnergyLedger(), 0.02, "active", False)
    assert ledger.total == 0.02
    assert ledger.misclassified == 0.0
    accumulate(ledger, 0.01, "sleep", True)
    assert ledger.misclassified == 0.01
    assert ledger.total == pytest.approx(sum(ledger.per_category.values()))


def test_accumulate_rejects_negative_and_unknown():
    with pytest.raises(ValueError):
        accumulate(EnergyLedger(), -1.0, "active")
    with pytest.raises(KeyError):
        accumulate(EnergyLedger(), 1.0, "laser")


def test_always_on_fifty_seconds_is_ten_joules():
    ledger = EnergyLedger()
    s = PlatformState(ACTIVE)
    energy = EnergyModelParams(rx_enabled=False)
    for _ in range(500):
        accumulate(ledger, step_energy(energy, s, s, 0.1), "active")
        assert receiver_energy(energy, 0.1) == 0.0
    assert ledger.total == pytest.approx(10.0, abs=1e-9)


def test_receiver_alone_fifty_seconds():
    ledger = EnergyLedger()
    for _ in range(500):
        accumulate(ledger, receiver_energy(TABLE, 0.1), "receiver")
    assert ledger.total == pytest.approx(1.0, abs=1e-12)


def closed_form_energy(params, modes, interval, elapsed):
    """Accumulated energy at ``elapsed`` seconds: full past intervals, the current
    interval's transition and its partial steady-state share, plus the receiver."""
    n = int(math.floor(elapsed / interval + 1e-9))
    total = 0.0
    prev = modes[0]
    states = modes[1:]
    for h in range(n):
        new = states[h]
        total += interval * ((params.p_active + params.p_detector) * new + params.p_sleep * (1 - new))
        total += params.e_trans * abs(new - prev)
        prev = new
    return total + elapsed * params.p_rx


@given(st.lists(st.integers(0, 1), min_size=2, max_size=60))
def test_ledger_matches_closed_form(modes):
    ledger = EnergyLedger()
    for old, new in zip(modes, modes[1:]):
        e = step_energy(TABLE, PlatformState(new), PlatformState(old), 0.1)
        accumulate(ledger, e, "active" if new else "sleep")
        accumulate(ledger, receiver_energy(TABLE, 0.1), "receiver")
    expected = closed_form_energy(TABLE, modes, 0.1, 0.1 * (len(modes) - 1))
    assert ledger.total == pytest.approx(expected, rel=1e-12, abs=1e-15)
