"""Sequence compilation: timing bookkeeping for every pulse family."""

import numpy as np
import pytest

from spinbath import (
    ContractError,
    TimelineError,
    compile_cdd,
    compile_cpmg,
    compile_free,
    compile_hahn,
    compile_pdd,
    compile_udd,
    cycle_stats,
    dump_timeline,
    validate_timeline,
)

TAU_P = 10.4


def test_free_timeline_has_no_events():
    tl = compile_free(120.0, n_cycles=3)
    assert tl.events == ()
    assert tl.cycle_time == 120.0
    assert tl.n_cycles == 3
    assert tl.total_time == 360.0
    assert validate_timeline(tl) == []


def test_hahn_layout():
    tl = compile_hahn(30.0, TAU_P)
    assert tl.cycle_time == pytest.approx(2 * 30.0 + TAU_P)
    assert tl.pulses_per_cycle == 1
    ev = tl.events[0]
    assert ev.axis == "y"
    assert ev.start_time == pytest.approx(30.0)
    assert ev.nominal_angle == pytest.approx(np.pi)
    assert validate_timeline(tl) == []


def test_cpmg_layout_and_variants():
    tl = compile_cpmg(30.0, TAU_P)
    assert tl.cycle_time == pytest.approx(2 * 30.0 + 2 * TAU_P)
    assert tl.pulses_per_cycle == 2
    # half delay, pulse, full delay, pulse, half delay
    assert tl.events[0].start_time == pytest.approx(15.0)
    assert tl.events[1].start_time == pytest.approx(15.0 + TAU_P + 30.0)
    assert [ev.axis for ev in tl.events] == ["y", "y"]

    assert [ev.axis for ev in compile_cpmg(30.0, variant="cp").events] == ["x", "x"]
    assert [ev.axis for ev in compile_cpmg(30.0, variant="cpmg2").events] == ["y", "-y"]
    with pytest.raises(ContractError):
        compile_cpmg(30.0, variant="carr")


def test_pdd_layout():
    tl = compile_pdd(40.0, TAU_P)
    assert tl.cycle_time == pytest.approx(4 * (40.0 + TAU_P))
    assert tl.pulses_per_cycle == 4
    assert [ev.axis for ev in tl.events] == ["x", "y", "x", "y"]
    gaps = tl.free_gaps()
    assert gaps[0][0] == pytest.approx(0.0)
    assert all(length == pytest.approx(40.0) for _, length in gaps)
    assert validate_timeline(tl) == []


def test_cdd_pulse_counts_follow_recursion():
    # N_n = 4 N_{n-1} + 4
    expected = {1: 4, 2: 20, 3: 84, 4: 340}
    for order, count in expected.items():
        tl = compile_cdd(order, 5.0, 0.0)
        assert tl.pulses_per_cycle == count


def test_cdd_order_one_is_pdd():
    a = compile_cdd(1, 17.0, TAU_P)
    b = compile_pdd(17.0, TAU_P)
    assert a.cycle_time == pytest.approx(b.cycle_time)
    assert [ev.axis for ev in a.events] == [ev.axis for ev in b.events]
    assert np.allclose([ev.start_time for ev in a.events],
                       [ev.start_time for ev in b.events])


def test_cdd_cycle_time_formulas():
    assert compile_cdd(2, 30.0, TAU_P).cycle_time == pytest.approx(16 * 30.0 + 20 * TAU_P)
    assert compile_cdd(3, 10.0, TAU_P).cycle_time == pytest.approx(64 * 10.0 + 84 * TAU_P)


def test_udd_fractional_times():
    # t_i = tau_c sin^2(pi i / (2N + 2))
    tl = compile_udd(4, 100.0)
    fracs = [ev.start_time / 100.0 for ev in tl.events]
    expected = [np.sin(np.pi * i / 10.0) ** 2 for i in range(1, 5)]
    assert np.allclose(fracs, expected, atol=1e-12)
    assert all(ev.axis == "y" for ev in tl.events)


def test_udd_low_orders_reduce_to_named_sequences():
    # one pulse: the Hahn echo layout
    u1 = compile_udd(1, 60.0)
    h = compile_hahn(30.0)
    assert u1.cycle_time == pytest.approx(h.cycle_time)
    assert u1.events[0].start_time == pytest.approx(h.events[0].start_time)
    # two pulses: CPMG spacing
    u2 = compile_udd(2, 80.0)
    c = compile_cpmg(40.0)
    assert u2.cycle_time == pytest.approx(c.cycle_time)
    assert np.allclose([ev.start_time for ev in u2.events],
                       [ev.start_time for ev in c.events], atol=1e-12)


def test_finite_pulse_udd_keeps_instants():
    # pulses begin at the ideal instants when widths are finite
    tl = compile_udd(3, 200.0, tau_p=4.0)
    starts = [ev.start_time for ev in tl.events]
    expected = [200.0 * np.sin(np.pi * i / 8.0) ** 2 for i in range(1, 4)]
    assert np.allclose(starts, expected, atol=1e-12)


def test_expanded_events_shift_by_cycle():
    tl = compile_cpmg(10.0, 0.0, n_cycles=3)
    starts = [ev.start_time for ev in tl.expanded_events()]
    assert len(starts) == 6
    assert starts[2] == pytest.approx(starts[0] + tl.cycle_time)
    assert starts[4] == pytest.approx(starts[0] + 2 * tl.cycle_time)


def test_cycle_stats():
    tl = compile_pdd(40.0, TAU_P)
    st = cycle_stats(tl)
    assert st.tau_c == pytest.approx(tl.cycle_time)
    assert st.pulses_per_cycle == 4
    assert st.avg_pulses_per_unit_time == pytest.approx(4 / tl.cycle_time)
    assert st.free_periods == 4


def test_rejects_unphysical_parameters():
    with pytest.raises(ContractError):
        compile_hahn(-1.0)
    with pytest.raises(TimelineError):
        compile_cpmg(10.0, tau_p=-0.5)
    with pytest.raises(ContractError):
        compile_cdd(0, 10.0)
    with pytest.raises(ContractError):
        compile_udd(0, 50.0)
    with pytest.raises(TimelineError):
        compile_free(0.0)
    # pulses that would not fit into the delays
    with pytest.raises((ContractError, TimelineError)):
        compile_udd(6, 10.0, tau_p=5.0)


def test_dump_timeline_text():
    text = dump_timeline(compile_cpmg(30.0, TAU_P))
    lines = text.splitlines()
    assert lines[0] == "# timeline cpmg"
    assert any("tau_c_us=80.8" in line for line in lines)
    # one row per pulse with axis and start
    rows = [line for line in lines if not line.startswith("#")]
    assert len(rows) == 2
    assert rows[0].split()[1] == "y"
