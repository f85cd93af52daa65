import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tdoa_toolkit.acoustics import (RoomSpec, DirectivityPattern, SourcePath, bezier_point, discretize_path,
                                    tdoa_ground_truth, enumerate_image_sources, subcardioid_gain, compute_rir,
                                    render_moving_source, reflection_to_t60, t60_to_reflection, SPEED_OF_SOUND)
from tdoa_toolkit.acoustics.geometry import random_unit_vector
from tdoa_toolkit.audio import AudioClip
from tdoa_toolkit.dsp.filters import convolve
from tdoa_toolkit.enums import DirectivityKind
from tdoa_toolkit.exceptions import InvalidArgumentError, OutOfRangeError

FS = 16000
OMNI = DirectivityPattern.omni()


@pytest.fixture
def curve() -> SourcePath:
    return SourcePath.bezier((0, 0, 0), (2, 2, 0), (4, 0, 0), duration_s=1.0)


class TestPaths:

    def test_endpoints(self, curve):
        np.testing.assert_allclose(bezier_point(curve, 0.0), (0, 0, 0))
        np.testing.assert_allclose(bezier_point(curve, 1.0), (4, 0, 0))

    def test_midpoint(self, curve):
        np.testing.assert_allclose(bezier_point(curve, 0.5), (2, 1, 0))

    @pytest.mark.parametrize("u", [-0.1, 1.5])
    def test_parameter_outside_unit_interval(self, curve, u):
        with pytest.raises(InvalidArgumentError):
            bezier_point(curve, u)

    def test_discretize_stationary(self):
        path = SourcePath.stationary((1, 2, 3), 1.0)
        np.testing.assert_allclose(discretize_path(path, 5), np.tile([1, 2, 3], (5, 1)))

    def test_discretize_two_points_are_endpoints(self, curve):
        np.testing.assert_allclose(discretize_path(curve, 2), [(0, 0, 0), (4, 0, 0)])

    def test_discretize_three_points(self, curve):
        np.testing.assert_allclose(discretize_path(curve, 3), [(0, 0, 0), (2, 1, 0), (4, 0, 0)])

    def test_discretize_needs_positive_count(self, curve):
        with pytest.raises(InvalidArgumentError):
            discretize_path(curve, 0)

    def test_arc_length_of_straight_path(self):
        path = SourcePath.bezier((0, 0, 0), (1, 0, 0), (2, 0, 0), duration_s=2.0)
        assert path.arc_length == pytest.approx(2.0)
        assert path.mean_speed == pytest.approx(1.0)

    def test_speed_limit(self):
        with pytest.raises(InvalidArgumentError):
            SourcePath.bezier((0, 0, 0), (1, 0, 0), (2, 0, 0), duration_s=0.1, max_speed=5.0)

    def test_dict_round_trip(self, curve):
        again = SourcePath.from_dict(curve.to_dict())
        np.testing.assert_array_equal(again.points, curve.points)
        assert again.kind == curve.kind


class TestGeometry:

    def test_equidistant_microphones(self):
        assert tdoa_ground_truth((1, 0, 0), (1, 0, 0), (5, 5, 5)) == 0.0

    def test_pythagorean_example(self):
        assert tdoa_ground_truth((0, 0, 0), (3, 0, 0), (3, 4, 0), 343.0) == pytest.approx(1 / 343)
        assert tdoa_ground_truth((0, 0, 0), (3, 0, 0), (3, 4, 0), 343.0) == pytest.approx(2.9155e-3, rel=1e-4)

    def test_antisymmetric_in_microphones(self, rng):
        r_i, r_j, s = rng.uniform(0, 5, (3, 3))
        assert tdoa_ground_truth(r_i, r_j, s) == -tdoa_ground_truth(r_j, r_i, s)

    def test_speed_must_be_positive(self):
        with pytest.raises(InvalidArgumentError):
            tdoa_ground_truth((0, 0, 0), (1, 0, 0), (2, 0, 0), speed=0.0)

    @pytest.mark.parametrize("direction, gain", [((1, 0, 0), 1.0), ((-1, 0, 0), 0.5), ((0, 1, 0), 0.75)])
    def test_subcardioid_examples(self, direction, gain):
        assert subcardioid_gain((1, 0, 0), direction) == pytest.approx(gain)

    def test_subcardioid_rejects_non_unit_vectors(self):
        with pytest.raises(InvalidArgumentError):
            subcardioid_gain((2, 0, 0), (1, 0, 0))

    @given(st.integers(0, 2 ** 32 - 1))
    def test_subcardioid_range(self, seed):
        rng = np.random.default_rng(seed)
        assert 0.5 <= subcardioid_gain(random_unit_vector(rng), random_unit_vector(rng)) <= 1.0


class TestImageSources:

    @pytest.fixture
    def room(self) -> RoomSpec:
        return RoomSpec((5, 4, 6), 0.7)

    def test_order_zero_is_the_source(self, room):
        images = enumerate_image_sources(room, (1, 2, 3), (1, 0, 0), 0)
        assert len(images) == 1
        assert images[0].generation == 0
        np.testing.assert_allclose(images[0].position, (1, 2, 3))

    def test_first_order_has_one_image_per_wall(self, room):
        images = enumerate_image_sources(room, (1, 2, 3), (1, 0, 0), 1)
        assert len(images) == 7
        assert sorted(int(g) for g in images.generations) == [0, 1, 1, 1, 1, 1, 1]
        positions = {tuple(np.round(p, 9)) for p in images.positions}
        assert (-1.0, 2.0, 3.0) in positions
        assert (9.0, 2.0, 3.0) in positions

    def test_mirrored_orientation_flips_the_normal_component(self, room):
        images = enumerate_image_sources(room, (1, 2, 3), (0.6, 0.8, 0.0), 1)
        for image in images:
            if np.allclose(image.position, (-1, 2, 3)):
                np.testing.assert_allclose(image.mirrored_orientation, (-0.6, 0.8, 0.0))
                assert image.amplitude_factor == pytest.approx(0.7)
                break
        else:
            pytest.fail("no image behind the x = 0 wall")

    def test_image_count_grows_as_an_octahedron(self, room):
        # 1 + 6 + 18 + 38: lattice points with |a| + |b| + |c| <= 3
        assert len(enumerate_image_sources(room, (1, 2, 3), (1, 0, 0), 3)) == 63

    def test_source_outside_room(self, room):
        with pytest.raises(InvalidArgumentError):
            enumerate_image_sources(room, (6, 2, 3), (1, 0, 0), 1)


class TestRir:

    def test_direct_path_arrival(self):
        room = RoomSpec((6, 5, 4), 0.5)
        rir = compute_rir(room, (1, 1, 1), OMNI, (3, 1, 1), OMNI, max_order=0, rir_len_samples=1024)
        assert 2 / SPEED_OF_SOUND * FS == pytest.approx(93.29, abs=0.01)
        assert int(np.argmax(rir)) == 93
        assert rir.sum() == pytest.approx(1 / (8 * np.pi), rel=1e-9)

    def test_direct_path_beyond_rir_length(self):
        room = RoomSpec((6, 5, 4), 0.5)
        with pytest.raises(InvalidArgumentError):
            compute_rir(room, (1, 1, 1), OMNI, (5, 4, 3), OMNI, max_order=0, rir_len_samples=64)

    def test_microphone_outside_room(self):
        with pytest.raises(InvalidArgumentError):
            compute_rir(RoomSpec((6, 5, 4), 0.5), (1, 1, 1), OMNI, (7, 1, 1), OMNI)

    @pytest.mark.parametrize("seed", range(20))
    def test_first_order_arrivals_match_mirror_geometry(self, seed):
        rng = np.random.default_rng(seed)
        dims = rng.uniform(2.0, 6.0, 3)
        room = RoomSpec(dims, rng.uniform(0.1, 0.9))
        while True:
            src, mic = rng.uniform(0.3, dims - 0.3, (2, 3))
            if np.linalg.norm(src - mic) > 1.0:
                break
        src_pattern = DirectivityPattern(DirectivityKind.SUBCARDIOID, random_unit_vector(rng))
        mic_pattern = DirectivityPattern(DirectivityKind.SUBCARDIOID, random_unit_vector(rng))

        expected = []
        for axis in range(3):
            for wall in (0.0, dims[axis]):
                image, orient = src.copy(), src_pattern.orientation.copy()
                image[axis] = 2 * wall - src[axis]
                orient[axis] = -orient[axis]
                expected.append((image, orient, room.reflection_coeff))
        expected.append((src, src_pattern.orientation, 1.0))

        total = 0.0
        for image, orient, factor in expected:
            d = np.linalg.norm(image - mic)
            direction = (image - mic) / d
            total += (factor * subcardioid_gain(mic_pattern.orientation, direction)
                      * subcardioid_gain(orient, -direction) / (4 * np.pi * d))

        rir = compute_rir(room, src, src_pattern, mic, mic_pattern, max_order=1, rir_len_samples=4096)
        assert rir.sum() == pytest.approx(total, rel=1e-9)

        direct = np.linalg.norm(src - mic) / SPEED_OF_SOUND * FS
        alone = compute_rir(room, src, src_pattern, mic, mic_pattern, max_order=0, rir_len_samples=4096)
        assert abs(int(np.argmax(np.abs(alone))) - direct) <= 0.5 + 1e-9

    def test_energy_grows_with_reflection(self):
        energies = []
        for r in np.linspace(0.05, 0.95, 19):
            rir = compute_rir(RoomSpec((5, 4, 3), r), (1.0, 1.2, 1.0), OMNI, (3.6, 2.5, 1.7), OMNI, max_order=8,
                              rir_len_samples=4096)
            energies.append(np.sum(rir ** 2))
        assert all(b >= a for a, b in zip(energies, energies[1:]))

    @pytest.mark.parametrize("seed", range(20))
    def test_direct_path_dominates_at_low_reflection(self, seed):
        rng = np.random.default_rng(100 + seed)
        dims = rng.uniform(2.0, 8.0, 3)
        room = RoomSpec(dims, rng.uniform(0.05, 0.2))
        while True:
            src, mic = rng.uniform(0.3, dims - 0.3, (2, 3))
            if np.linalg.norm(src - mic) > 0.5:
                break
        rir = compute_rir(room, src, OMNI, mic, OMNI)
        direct = np.linalg.norm(src - mic) / SPEED_OF_SOUND * FS
        assert abs(int(np.argmax(np.abs(rir))) - direct) <= 1.0


class TestRender:

    @pytest.fixture
    def room(self) -> RoomSpec:
        return RoomSpec((5, 4, 3), 0.3)

    def test_stationary_path_equals_single_rir(self, room, rng):
        source = AudioClip(rng.standard_normal(800), FS)
        path = SourcePath.stationary((1, 1, 1), source.duration_s)
        rendered = render_moving_source(room, path, source, OMNI, (4, 3, 2), OMNI, k=5, max_order=2,
                                        rir_len_samples=512)
        rir = compute_rir(room, (1, 1, 1), OMNI, (4, 3, 2), OMNI, 2, 512)
        np.testing.assert_allclose(rendered.samples, convolve(source.samples, rir)[:800], atol=1e-9)

    def test_single_segment_uses_the_start_position(self, room, rng):
        source = AudioClip(rng.standard_normal(800), FS)
        path = SourcePath.bezier((1, 1, 1), (2, 2, 1), (3, 1, 1), source.duration_s)
        rendered = render_moving_source(room, path, source, OMNI, (4, 3, 2), OMNI, k=1, max_order=1,
                                        rir_len_samples=512)
        rir = compute_rir(room, (1, 1, 1), OMNI, (4, 3, 2), OMNI, 1, 512)
        np.testing.assert_allclose(rendered.samples, convolve(source.samples, rir)[:800], atol=1e-9)

    def test_preroll_is_dropped(self, room, rng):
        source = AudioClip(rng.standard_normal(800), FS)
        path = SourcePath.stationary((1, 1, 1), source.duration_s)
        full = render_moving_source(room, path, source, OMNI, (4, 3, 2), OMNI, max_order=1, rir_len_samples=512)
        cut = render_moving_source(room, path, source, OMNI, (4, 3, 2), OMNI, max_order=1, rir_len_samples=512,
                                   preroll_samples=300)
        np.testing.assert_array_equal(cut.samples, full.samples[300:])

    def test_moving_impulses_arrive_per_segment(self, room):
        k, segment = 4, 400
        source = np.zeros(k * segment)
        source[::segment] = 1.0
        clip = AudioClip(source, FS)
        path = SourcePath.bezier((0.5, 0.5, 1.5), (2.5, 3.5, 1.5), (4.5, 0.5, 1.5), clip.duration_s)
        mic = np.array([2.5, 2.0, 1.0])
        rendered = render_moving_source(room, path, clip, OMNI, mic, OMNI, k=k, max_order=0,
                                        rir_len_samples=512).samples
        for j, position in enumerate(discretize_path(path, k)):
            delay = np.linalg.norm(position - mic) / SPEED_OF_SOUND * FS
            window = rendered[j * segment:(j + 1) * segment]
            assert abs(int(np.argmax(window)) - delay) <= 0.5 + 1e-9

    @pytest.mark.parametrize("moving", [False, True])
    def test_rendering_is_linear(self, room, rng, moving):
        a, b = rng.standard_normal(1200), rng.standard_normal(1200)
        if moving:
            path = SourcePath.bezier((1, 1, 1), (2.5, 3, 1.5), (4, 1, 2), 1200 / FS)
        else:
            path = SourcePath.stationary((1, 1, 1), 1200 / FS)

        def render(x: np.ndarray) -> np.ndarray:
            return render_moving_source(room, path, AudioClip(x, FS), OMNI, (4, 3, 2), OMNI, k=6, max_order=3,
                                        rir_len_samples=1024).samples

        np.testing.assert_allclose(render(a + b), render(a) + render(b), atol=1e-9)
        np.testing.assert_allclose(render(0.3 * a), 0.3 * render(a), atol=1e-9)

    def test_rejects_path_leaving_the_room(self, room, rng):
        source = AudioClip(rng.standard_normal(100), FS)
        path = SourcePath.bezier((1, 1, 1), (9, 1, 1), (1, 2, 1), source.duration_s)
        with pytest.raises(InvalidArgumentError):
            render_moving_source(room, path, source, OMNI, (4, 3, 2), OMNI, k=4, max_order=0, rir_len_samples=512)

    def test_rejects_sample_rate_mismatch(self, room, rng):
        source = AudioClip(rng.standard_normal(100), 8000)
        with pytest.raises(InvalidArgumentError):
            render_moving_source(room, SourcePath.stationary((1, 1, 1), 1.0), source, OMNI, (4, 3, 2), OMNI)


class TestReverb:

    def test_cube_example(self):
        r = t60_to_reflection((5, 5, 5), 0.2)
        assert 1 - r ** 2 == pytest.approx(0.671, abs=1e-3)
        assert r == pytest.approx(0.574, abs=1e-3)

    def test_round_trip(self):
        r = t60_to_reflection((4, 6, 3), 0.5)
        assert reflection_to_t60(RoomSpec((4, 6, 3), r)) == pytest.approx(0.5)

    def test_t60_diverges_as_walls_become_perfect(self):
        dims = (5, 4, 3)
        assert reflection_to_t60(RoomSpec(dims, 0.9999)) > 100 * reflection_to_t60(RoomSpec(dims, 0.5))

    def test_unreachable_t60(self):
        with pytest.raises(OutOfRangeError):
            t60_to_reflection((5, 5, 5), 0.05)

    def test_non_positive_t60(self):
        with pytest.raises(InvalidArgumentError):
            t60_to_reflection((5, 5, 5), 0.0)


class TestRoomSpec:

    @pytest.mark.parametrize("reflection", [0.0, 1.0, -0.1])
    def test_reflection_must_lie_in_open_unit_interval(self, reflection):
        with pytest.raises(InvalidArgumentError):
            RoomSpec((5, 4, 3), reflection)

    def test_dimensions_must_be_positive(self):
        with pytest.raises(InvalidArgumentError):
            RoomSpec((5, 0, 3), 0.5)

    def test_margin_containment(self):
        room = RoomSpec((5, 4, 3), 0.5)
        assert room.contains((0.5, 0.5, 0.5), margin=0.3)
        assert not room.contains((0.2, 0.5, 0.5), margin=0.3)

    def test_volume_and_surface(self):
        room = RoomSpec((5, 5, 5), 0.5)
        assert room.volume == pytest.approx(125)
        assert room.surface_area == pytest.approx(150)
        assert math.isclose(RoomSpec.from_dict(room.to_dict()).reflection_coeff, 0.5)
