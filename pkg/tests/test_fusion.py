import numpy as np
import pytest
from hypothesis import given, strategies as st

from agnav.camera import BoundingBox, CameraIntrinsics
from agnav.detect import Detection, SceneObject, SyntheticScene, synthetic_depth, synthetic_render
from agnav.errors import (
    DegenerateReferenceError,
    EmptyMaskError,
    InvalidInputError,
    MissingReferenceError,
)
from agnav.fusion import (
    SCALE_METRIC,
    SCALE_RELATIVE,
    DepthMap,
    Mask,
    bbox_mask,
    fuse_distance,
    localize_object,
    median_masked_depth,
    scale_depth_map,
)
from agnav.mapping import METHOD_DEPTH_ONLY, METHOD_FUSED

CAM = CameraIntrinsics(500.0, (320.0, 240.0), (640, 480))


def depth_of(values, scale=SCALE_METRIC):
    return DepthMap(np.asarray(values, dtype=np.float64), scale)


def mask_at(shape, coords):
    bitmap = np.zeros(shape, dtype=bool)
    for r, c in coords:
        bitmap[r, c] = True
    return Mask(bitmap)


class TestMedianMaskedDepth:
    def test_odd_count(self):
        depth = depth_of([[1.0, 2.0, 9.0], [7.0, 7.0, 7.0]])
        mask = mask_at((2, 3), [(0, 0), (0, 1), (0, 2)])
        assert median_masked_depth(depth, mask) == 2.0

    def test_constant_map(self):
        depth = depth_of(np.full((4, 4), 3.25))
        mask = mask_at((4, 4), [(0, 0), (1, 2), (3, 3)])
        assert median_masked_depth(depth, mask) == 3.25

    def test_even_count_mean_of_middle(self):
        depth = depth_of([[1.0, 3.0]])
        mask = mask_at((1, 2), [(0, 0), (0, 1)])
        assert median_masked_depth(depth, mask) == 2.0

    def test_empty_mask_raises(self):
        with pytest.raises(EmptyMaskError):
            median_masked_depth(depth_of([[1.0]]), mask_at((1, 1), []))

    def test_dimension_mismatch_raises(self):
        with pytest.raises(InvalidInputError):
            median_masked_depth(depth_of([[1.0, 2.0]]), mask_at((2, 2), [(0, 0)]))

    def test_permutation_and_unmasked_invariance(self):
        rng = np.random.default_rng(4)
        values = rng.uniform(0.1, 10.0, size=(6, 6))
        bitmap = rng.random((6, 6)) < 0.4
        bitmap[0, 0] = True
        base = median_masked_depth(DepthMap(values), Mask(bitmap))

        # permute masked values among masked pixels
        perm = values.copy()
        masked_vals = perm[bitmap]
        perm[bitmap] = rng.permutation(masked_vals)
        assert median_masked_depth(DepthMap(perm), Mask(bitmap)) == base

        # unmasked pixels are irrelevant
        noise = values.copy()
        noise[~bitmap] = rng.uniform(0.0, 99.0, size=(~bitmap).sum())
        assert median_masked_depth(DepthMap(noise), Mask(bitmap)) == base


class TestScaleDepthMap:
    def test_single_reference_doubles(self):
        depth = depth_of(np.full((3, 3), 2.0), SCALE_RELATIVE)
        mask = mask_at((3, 3), [(1, 1)])
        out = scale_depth_map(depth, [(mask, 4.0)])
        assert out.scale_state == SCALE_METRIC
        assert np.array_equal(out.values, np.full((3, 3), 4.0))

    def test_median_of_reference_scales(self):
        # three references with medians 1.0 at known 2, 4, 6 -> scales {2, 4, 6}
        values = np.ones((1, 3))
        depth = DepthMap(values, SCALE_RELATIVE)
        refs = [
            (mask_at((1, 3), [(0, 0)]), 2.0),
            (mask_at((1, 3), [(0, 1)]), 4.0),
            (mask_at((1, 3), [(0, 2)]), 6.0),
        ]
        out = scale_depth_map(depth, refs)
        assert np.array_equal(out.values, values * 4.0)

    def test_consistent_reference_is_identity(self):
        rng = np.random.default_rng(9)
        values = rng.uniform(0.5, 8.0, size=(5, 5))
        depth = DepthMap(values, SCALE_RELATIVE)
        mask = mask_at((5, 5), [(2, 2)])
        out = scale_depth_map(depth, [(mask, float(values[2, 2]))])
        assert out.values.tobytes() == values.tobytes()  # bit-for-bit

    def test_reference_monotonicity(self):
        rng = np.random.default_rng(21)
        values = rng.uniform(0.5, 8.0, size=(4, 4))
        masks = [mask_at((4, 4), [(i, i)]) for i in range(3)]
        base_refs = [(m, float(values[i, i]) * 2.0) for i, m in enumerate(masks)]
        base = scale_depth_map(DepthMap(values, SCALE_RELATIVE), base_refs)
        for k in (0.5, 3.0, 7.0):
            scaled_refs = [(m, d * k) for m, d in base_refs]
            out = scale_depth_map(DepthMap(values, SCALE_RELATIVE), scaled_refs)
            assert np.allclose(out.values, base.values * k, rtol=1e-12)

    def test_errors(self):
        depth = depth_of(np.ones((2, 2)), SCALE_RELATIVE)
        with pytest.raises(MissingReferenceError):
            scale_depth_map(depth, [])
        zero_depth = depth_of(np.zeros((2, 2)), SCALE_RELATIVE)
        with pytest.raises(DegenerateReferenceError):
            scale_depth_map(zero_depth, [(mask_at((2, 2), [(0, 0)]), 1.0)])
        with pytest.raises(InvalidInputError):
            scale_depth_map(depth_of(np.ones((2, 2))), [(mask_at((2, 2), [(0, 0)]), 1.0)])


class TestFuseDistance:
    def test_weighted_average(self):
        est = fuse_distance(2.0, 3.0)
        assert est.fused_m == 2.2
        assert est.method == METHOD_FUSED

    def test_equal_inputs_fixed_point(self):
        for d in (0.3, 1.0, 7.5):
            assert fuse_distance(d, d).fused_m == pytest.approx(d, rel=1e-15)

    def test_depth_only_fallback(self):
        est = fuse_distance(None, 3.7)
        assert est.fused_m == 3.7
        assert est.method == METHOD_DEPTH_ONLY
        assert est.geometric_m is None

    def test_rejects_nonpositive(self):
        with pytest.raises(InvalidInputError):
            fuse_distance(-1.0, 2.0)
        with pytest.raises(InvalidInputError):
            fuse_distance(2.0, 0.0)

    @given(
        st.floats(min_value=0.01, max_value=100.0),
        st.floats(min_value=0.01, max_value=100.0),
    )
    def test_fused_between_inputs(self, g, z):
        fused = fuse_distance(g, z).fused_m
        assert min(g, z) - 1e-12 <= fused <= max(g, z) + 1e-12


def flat_object_scene(label="crate", distance=4.0, height=1.0, lateral=0.0):
    """One flat plate 'distance' meters ahead of an identity camera.

    The camera looks along world +x, so the plate has zero x extent (w) and
    its visible face spans y (d) and z (h).
    """
    obj = SceneObject(label, (distance, lateral, 0.0), (height, 0.0, 0.8))
    return SyntheticScene(objects=[obj], camera=CAM)


class TestLocalizeObject:
    def test_exact_scene_recovers_position(self):
        scene = flat_object_scene(distance=4.0)
        det = synthetic_render(scene)[0]
        depth = synthetic_depth(scene)
        obj = localize_object(det, depth, CAM, (1.0, 0.8, 0.2), scene.robot, scene.extrinsics)
        assert obj.method == METHOD_FUSED
        err = np.linalg.norm(np.array(obj.position) - np.array((4.0, 0.0, 0.0)))
        assert err < 1e-6

    def test_inflated_depth_fuses_80_20(self):
        scene = flat_object_scene(distance=4.0)
        det = synthetic_render(scene)[0]
        depth = synthetic_depth(scene)
        inflated = DepthMap(depth.values * 1.25, SCALE_METRIC)
        obj = localize_object(det, inflated, CAM, (1.0, 0.8, 0.2), scene.robot, scene.extrinsics)
        # fused = 0.8 * 4.0 + 0.2 * 5.0 = 4.2, along the +x optical axis
        assert obj.position[0] == pytest.approx(4.2, abs=1e-9)

    def test_unknown_catalog_uses_depth_only(self):
        scene = flat_object_scene(distance=3.0, lateral=0.4)
        det = synthetic_render(scene)[0]
        depth = synthetic_depth(scene)
        obj = localize_object(det, depth, CAM, None, scene.robot, scene.extrinsics)
        assert obj.method == METHOD_DEPTH_ONLY
        err = np.linalg.norm(np.array(obj.position) - np.array((3.0, 0.4, 0.0)))
        assert err < 1e-6

    def test_missing_mask_uses_bbox_interior(self):
        scene = flat_object_scene(distance=2.5)
        det = synthetic_render(scene)[0]
        stripped = Detection(det.label, det.bbox, det.confidence, mask=None)
        depth = synthetic_depth(scene)
        obj = localize_object(stripped, depth, CAM, (1.0, 0.8, 0.2), scene.robot, scene.extrinsics)
        assert obj.position[0] == pytest.approx(2.5, abs=1e-6)

    def test_relative_map_rejected(self):
        scene = flat_object_scene()
        det = synthetic_render(scene)[0]
        rel = DepthMap(synthetic_depth(scene).values, SCALE_RELATIVE)
        with pytest.raises(InvalidInputError):
            localize_object(det, rel, CAM, None)

    def test_fully_outside_image_rejected(self):
        det = Detection("crate", BoundingBox(-50.0, -50.0, -10.0, -10.0), 1.0)
        depth = depth_of(np.full((480, 640), 5.0))
        with pytest.raises(InvalidInputError):
            localize_object(det, depth, CAM, None)


class TestBboxMask:
    def test_covers_interior_pixel_centers(self):
        mask = bbox_mask(BoundingBox(1.0, 1.0, 3.0, 2.0), 5, 4)
        expected = np.zeros((4, 5), dtype=bool)
        expected[1, 1:3] = True  # centers (1.5, 1.5) and (2.5, 1.5)
        assert np.array_equal(mask.bitmap, expected)
