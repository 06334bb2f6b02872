import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mocomp.errors import EmptyRangeError, OutOfBoundsError, SkeletonMismatchError
from mocomp.motion import (
    DEFAULT_SKELETON,
    Decomposition,
    Motion,
    SubMovement,
    TimeInterval,
    crop,
    interval_to_frames,
    load_motion,
    mirror,
    mirror_text,
    motion_from_dict,
    neutral_frame,
    save_motion,
)


def random_motion(rng, n_frames=20):
    frames = rng.normal(0.0, 30.0, size=(n_frames, DEFAULT_SKELETON.n_features))
    return Motion(frames=frames, fps=20)


class TestMotionType:
    def test_rejects_nan(self):
        frames = np.zeros((3, 24))
        frames[1, 2] = np.nan
        with pytest.raises(ValueError):
            Motion(frames=frames, fps=20)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            Motion(frames=np.zeros((0, 24)), fps=20)

    def test_rejects_bad_fps(self):
        with pytest.raises(ValueError):
            Motion(frames=np.zeros((2, 24)), fps=0)

    def test_duration(self):
        m = Motion(frames=np.zeros((100, 24)), fps=20)
        assert m.duration_s == 5.0


class TestTimeTypes:
    def test_interval_requires_strict_order(self):
        with pytest.raises(ValueError):
            TimeInterval(3.0, 3.0)
        with pytest.raises(ValueError):
            TimeInterval(5.0, 3.0)

    def test_interval_requires_nonnegative_start(self):
        with pytest.raises(ValueError):
            TimeInterval(-1.0, 3.0)

    def test_submovement_requires_text(self):
        with pytest.raises(ValueError):
            SubMovement(text="  ", interval=TimeInterval(0.0, 2.0))

    def test_decomposition_requires_zero_start(self):
        items = (SubMovement("a person jumps", TimeInterval(1.0, 3.0)),)
        with pytest.raises(ValueError):
            Decomposition(items=items, total_duration_s=4.0)

    def test_decomposition_requires_bounds(self):
        items = (SubMovement("a person jumps", TimeInterval(0.0, 5.0)),)
        with pytest.raises(ValueError):
            Decomposition(items=items, total_duration_s=4.0)


class TestIntervalToFrames:
    def test_full_span(self):
        assert interval_to_frames(TimeInterval(0.0, 10.0), 20, 200) == (0, 200)

    def test_hand_arithmetic(self):
        # round(2.5 * 20) = 50, round(4.0 * 20) = 80
        assert interval_to_frames(TimeInterval(2.5, 4.0), 20, 200) == (50, 80)

    def test_end_clamped(self):
        assert interval_to_frames(TimeInterval(9.9, 12.0), 20, 200) == (198, 200)

    def test_ties_round_to_even(self):
        # 0.125 s * 20 fps = 2.5 -> 2; 0.175 s * 20 fps = 3.5 -> 4
        assert interval_to_frames(TimeInterval(0.125, 0.175), 20, 100) == (2, 4)

    def test_empty_after_clamp(self):
        with pytest.raises(EmptyRangeError):
            interval_to_frames(TimeInterval(10.0, 10.01), 20, 200)
        with pytest.raises(EmptyRangeError):
            interval_to_frames(TimeInterval(12.0, 14.0), 20, 200)

    @given(
        start=st.floats(min_value=0.0, max_value=50.0),
        extent=st.floats(min_value=1e-3, max_value=50.0),
        fps=st.integers(min_value=1, max_value=120),
        total=st.integers(min_value=1, max_value=2000),
    )
    @settings(max_examples=200)
    def test_nonempty_when_it_returns(self, start, extent, fps, total):
        interval = TimeInterval(start, start + extent)
        try:
            a, b = interval_to_frames(interval, fps, total)
        except EmptyRangeError:
            return
        assert 0 <= a < b <= total
        assert b - a >= 1


class TestCrop:
    def test_identity(self):
        m = random_motion(np.random.default_rng(0))
        assert np.array_equal(crop(m, (0, m.n_frames)).frames, m.frames)

    def test_length(self):
        m = random_motion(np.random.default_rng(1), n_frames=200)
        assert crop(m, (50, 80)).n_frames == 30

    def test_composes(self):
        m = random_motion(np.random.default_rng(2), n_frames=120)
        twice = crop(crop(m, (10, 100)), (0, 20))
        assert np.array_equal(twice.frames, crop(m, (10, 30)).frames)

    def test_out_of_bounds(self):
        m = random_motion(np.random.default_rng(3))
        with pytest.raises(OutOfBoundsError):
            crop(m, (0, m.n_frames + 1))
        with pytest.raises(OutOfBoundsError):
            crop(m, (5, 5))


class TestMirror:
    def test_neutral_pose_is_fixed_point(self):
        m = Motion(frames=np.tile(neutral_frame(), (4, 1)), fps=20)
        assert np.array_equal(mirror(m).frames, m.frames)

    def test_left_wrist_maps_to_right(self):
        frames = np.zeros((1, 24))
        li = DEFAULT_SKELETON.joint_index("left_wrist")
        ri = DEFAULT_SKELETON.joint_index("right_wrist")
        frames[0, 3 * li : 3 * li + 3] = (5.0, 0.0, 0.0)
        out = mirror(Motion(frames=frames, fps=20)).joints()[0]
        assert tuple(out[ri]) == (-5.0, 0.0, 0.0)
        assert tuple(out[li]) == (0.0, 0.0, 0.0)

    def test_involution_bit_exact(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            m = random_motion(rng)
            assert np.array_equal(mirror(mirror(m)).frames, m.frames)

    def test_skeleton_mismatch(self):
        with pytest.raises(SkeletonMismatchError):
            mirror(Motion(frames=np.zeros((2, 9)), fps=20))


class TestMirrorText:
    def test_paper_wording(self):
        assert mirror_text("raise the left arm") == "raise the right arm"

    def test_no_lateral_tokens(self):
        assert mirror_text("jump") == "jump"

    def test_simultaneous_swap(self):
        assert mirror_text("left hand touches right knee") == "right hand touches left knee"

    def test_case_preserved(self):
        assert mirror_text("Left arm then RIGHT leg") == "Right arm then LEFT leg"

    def test_whole_word_only(self):
        assert mirror_text("the copyright leftover") == "the copyright leftover"

    @given(st.lists(st.sampled_from(["left", "right", "arm", "leg", "the", "Left", "RIGHT"]), min_size=1, max_size=8))
    def test_involution(self, words):
        text = " ".join(words)
        assert mirror_text(mirror_text(text)) == text


class TestMotionIO:
    def test_round_trip(self, tmp_path):
        m = random_motion(np.random.default_rng(5))
        path = tmp_path / "m.json"
        save_motion(m, path)
        loaded = load_motion(path)
        assert np.array_equal(loaded.frames, m.frames)
        assert loaded.fps == m.fps

    def test_rejects_non_finite(self, tmp_path):
        data = {"fps": 20, "joints": list(DEFAULT_SKELETON.joint_names),
                "frames": [[float("inf")] * 24]}
        with pytest.raises(ValueError):
            motion_from_dict(data)

    def test_rejects_wrong_joints(self):
        data = {"fps": 20, "joints": ["root"], "frames": [[0.0] * 3]}
        with pytest.raises(SkeletonMismatchError):
            motion_from_dict(data)
