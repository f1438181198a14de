import random

import pytest

from harp.apps.buttons import HOVER, IDLE, PRESSED, ButtonError, ButtonFsm, button_step


def press_cycle(fsm: ButtonFsm, zs, lateral=0.0):
    events = []
    for z in zs:
        fsm, intensity, event = button_step(fsm, z, lateral)
        if event:
            events.append(event)
    return fsm, events


class TestRamp:
    def test_zero_depth_gives_hover_intensity(self):
        fsm = ButtonFsm()
        _, intensity, event = button_step(fsm, fsm.rest_z)
        assert intensity == pytest.approx(fsm.hover_intensity)
        assert event is None

    def test_full_depth_gives_max_and_one_press(self):
        fsm = ButtonFsm()
        fsm, intensity, event = button_step(fsm, fsm.rest_z - fsm.press_depth)
        assert intensity == pytest.approx(fsm.max_intensity)
        assert event == "press"
        fsm, intensity, event = button_step(fsm, fsm.rest_z - fsm.press_depth)
        assert event is None  # held: no repeat

    def test_half_depth_midpoint_no_event(self):
        fsm = ButtonFsm()
        _, intensity, event = button_step(fsm, fsm.rest_z - fsm.press_depth / 2)
        mid = fsm.hover_intensity + (fsm.max_intensity - fsm.hover_intensity) / 2
        assert intensity == pytest.approx(mid)
        assert event is None

    def test_intensity_clamped_below_travel(self):
        fsm = ButtonFsm()
        _, intensity, _ = button_step(fsm, fsm.rest_z - 2 * fsm.press_depth)
        assert intensity == pytest.approx(fsm.max_intensity)


class TestTransitions:
    def test_press_then_release(self):
        fsm = ButtonFsm()
        zs = [fsm.rest_z, fsm.rest_z - fsm.press_depth, fsm.rest_z]
        _, events = press_cycle(fsm, zs)
        assert events == ["press", "release"]

    def test_release_requires_hysteresis(self):
        fsm = ButtonFsm()
        fsm, _, event = button_step(fsm, fsm.rest_z - fsm.press_depth)
        assert event == "press"
        # back up inside the band: still held
        fsm, _, event = button_step(fsm, fsm.rest_z - fsm.press_depth + fsm.hysteresis / 2)
        assert event is None and fsm.state == PRESSED
        fsm, _, event = button_step(fsm, fsm.rest_z - fsm.press_depth + 2 * fsm.hysteresis)
        assert event == "release" and fsm.state == HOVER

    def test_lateral_exit_goes_idle(self):
        fsm = ButtonFsm()
        fsm, intensity, _ = button_step(fsm, fsm.rest_z, lateral_dist=fsm.palm_radius * 2)
        assert fsm.state == IDLE
        assert intensity == 0.0

    def test_lateral_exit_while_pressed_releases(self):
        fsm = ButtonFsm()
        fsm, _, event = button_step(fsm, fsm.rest_z - fsm.press_depth)
        assert event == "press"
        fsm, _, event = button_step(fsm, fsm.rest_z - fsm.press_depth,
                                    lateral_dist=fsm.palm_radius * 2)
        assert event == "release" and fsm.state == IDLE

    def test_exactly_one_press_per_noisy_descent(self):
        # jitter within the hysteresis band after the press must not re-fire
        rng = random.Random(1234)
        fsm = ButtonFsm()
        presses = releases = 0
        descents = 0
        for _ in range(10_000):
            if rng.random() < 0.02 and fsm.state != PRESSED:
                descents += 1
                # committed descent to full depth with noise inside the band
                depth = fsm.press_depth + rng.uniform(0, fsm.hysteresis / 2)
            elif fsm.state == PRESSED and rng.random() < 0.3:
                # wobble around the threshold without crossing the release line
                depth = fsm.press_depth - rng.uniform(0, fsm.hysteresis * 0.9)
            elif fsm.state == PRESSED and rng.random() < 0.05:
                depth = 0.0  # full retreat
            else:
                depth = rng.uniform(0, fsm.press_depth - fsm.hysteresis)
            fsm, _, event = button_step(fsm, fsm.rest_z - depth)
            if event == "press":
                presses += 1
            elif event == "release":
                releases += 1
        assert presses == descents
        assert presses - 1 <= releases <= presses

    def test_invalid_configurations(self):
        with pytest.raises(ButtonError):
            ButtonFsm(hysteresis=0.0)
        with pytest.raises(ButtonError):
            ButtonFsm(hysteresis=0.05, press_depth=0.03)
        with pytest.raises(ButtonError):
            ButtonFsm(hover_intensity=1.0, max_intensity=1.0)
