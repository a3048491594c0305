import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from guidenav.handle import ButtonDecoder, ButtonEvent

W = 0.4


def press(decoder, button, t):
    decoder.record_press(ButtonEvent(button, t))


def test_first_event_buffers():
    d = ButtonDecoder(W)
    press(d, "up", 0.0)
    assert d.pending == 1


def test_rapid_followup_buffers():
    d = ButtonDecoder(W)
    press(d, "up", 0.0)
    press(d, "up", 0.001)
    assert d.pending == 2


def test_out_of_order_press_rejected():
    d = ButtonDecoder(W)
    press(d, "up", 1.0)
    with pytest.raises(ValueError, match="arrived after"):
        press(d, "down", 0.5)


def test_single_up_decodes_turn_right_after_window():
    d = ButtonDecoder(W)
    press(d, "up", 0.0)
    assert d.decode(0.3) is None       # still ambiguous
    cmd = d.decode(0.5)
    assert cmd.kind == "TurnRight"
    assert d.decode(0.5) is None


def test_double_up_decodes_speed_up_immediately():
    d = ButtonDecoder(W)
    press(d, "up", 0.0)
    press(d, "up", 0.2)
    cmd = d.decode(0.2)
    assert cmd.kind == "SpeedUp"
    assert d.pending == 0


def test_double_down_decodes_slow_down():
    d = ButtonDecoder(W)
    press(d, "down", 0.0)
    press(d, "down", 0.2)
    assert d.decode(0.2).kind == "SlowDown"


def test_single_down_decodes_turn_left():
    d = ButtonDecoder(W)
    press(d, "down", 0.0)
    assert d.decode(0.45).kind == "TurnLeft"


def test_mixed_buttons_within_window_are_two_singles():
    d = ButtonDecoder(W)
    press(d, "up", 0.0)
    press(d, "down", 0.2)
    first = d.decode(0.25)
    assert first.kind == "TurnRight"   # resolved early by the different button
    assert d.decode(0.25) is None      # the down press still inside its window
    second = d.decode(0.7)
    assert second.kind == "TurnLeft"


def test_same_button_beyond_window_is_two_singles():
    d = ButtonDecoder(W)
    press(d, "up", 0.0)
    press(d, "up", 0.75)
    cmds = d.decode_all(1.5)
    assert [c.kind for c in cmds] == ["TurnRight", "TurnRight"]


def test_third_rapid_press_starts_new_group():
    d = ButtonDecoder(W)
    press(d, "up", 0.0)
    press(d, "up", 0.2)    # pairs with the first
    press(d, "up", 0.3)    # new group: a lone single
    cmds = d.decode_all(0.31)
    assert [c.kind for c in cmds] == ["SpeedUp"]
    assert d.decode(0.8).kind == "TurnRight"


def test_boundary_press_exactly_at_window_is_double():
    d = ButtonDecoder(W)
    press(d, "up", 0.0)
    press(d, "up", W)
    assert d.decode(W).kind == "SpeedUp"


@given(st.lists(st.tuples(st.sampled_from(["up", "down"]),
                          st.floats(0, 0.25)), max_size=25))
@settings(max_examples=200)
def test_exactly_once_consumption(steps):
    # n recorded presses always decode into commands consuming exactly n presses
    d = ButtonDecoder(W)
    t = 0.0
    total = 0
    singles_doubles = []
    for button, gap in steps:
        t += gap
        d.record_press(ButtonEvent(button, t))
        total += 1
        singles_doubles.extend(d.decode_all(t))
    singles_doubles.extend(d.decode_all(t + 10 * W))
    consumed = sum(2 if c.kind in ("SpeedUp", "SlowDown") else 1
                   for c in singles_doubles)
    assert consumed == total
    assert d.pending == 0


@given(st.floats(0, 5))
@settings(max_examples=50)
def test_single_press_latency_bound(t0):
    # decode runs at 20 Hz; a single press must emit within W + one period
    d = ButtonDecoder(W)
    d.record_press(ButtonEvent("up", t0))
    period = 0.05
    k = 0
    while True:
        now = k * period
        cmd = d.decode(now)
        if cmd is not None:
            assert now <= t0 + W + period + 1e-9
            break
        k += 1
        assert k < 10_000


def test_decode_depends_only_on_buffer_and_now():
    a, b = ButtonDecoder(W), ButtonDecoder(W)
    for d in (a, b):
        press(d, "up", 0.0)
        press(d, "down", 0.3)
        press(d, "down", 0.5)
    assert [c.kind for c in a.decode_all(2.0)] == [c.kind for c in b.decode_all(2.0)]
