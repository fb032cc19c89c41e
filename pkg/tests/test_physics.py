import pytest

from _oracles import oracle_dependencies, oracle_settle
from conftest import make_box, make_scene
from shelfplan import physics
from shelfplan.errors import MissingBox
from shelfplan.scene import SHELF, SceneConfig, generate_scene


class TestContacts:
    def test_cube_exactly_on_cube(self):
        scene = make_scene([
            make_box("A", (0.2, 0.2, 0.2), (0.1, 0.1, 0.1)),
            make_box("B", (0.2, 0.2, 0.2), (0.1, 0.1, 0.3)),
        ])
        sm = physics.compute_contacts(scene)
        pairs = {(p.supporter_id, p.supported_id) for p in sm.patches}
        assert pairs == {(SHELF, "A"), ("A", "B")}
        patch = sm.by_supported["B"][0]
        assert patch.area == pytest.approx(0.04, rel=1e-12)

    def test_bridge_patches(self, p1_scene):
        sm = physics.compute_contacts(p1_scene)
        c_patches = {p.supporter_id: p for p in sm.by_supported["C"]}
        assert set(c_patches) == {"A", "B"}
        ax0, _, ax1, _ = c_patches["A"].rect
        bx0, _, bx1, _ = c_patches["B"].rect
        assert (ax0, ax1) == pytest.approx((0.0, 0.2), abs=1e-12)
        assert (bx0, bx1) == pytest.approx((0.4, 0.6), abs=1e-12)
        assert c_patches["A"].area == pytest.approx(0.04, rel=1e-12)
        assert c_patches["B"].area == pytest.approx(0.04, rel=1e-12)

    def test_gap_means_no_patch(self):
        scene = make_scene([
            make_box("A", (0.2, 0.2, 0.2), (0.1, 0.1, 0.1)),
            make_box("B", (0.2, 0.2, 0.2), (0.35, 0.1, 0.1)),
        ])
        sm = physics.compute_contacts(scene)
        assert all(p.supporter_id == SHELF for p in sm.patches)

    def test_patch_invariants_on_generated_scenes(self):
        for seed in range(6):
            scene = generate_scene(seed, 6)
            sm = physics.compute_contacts(scene)
            for p in sm.patches:
                assert p.area > scene.config.min_overlap_area
                supported = scene.by_id[p.supported_id]
                if p.supporter_id == SHELF:
                    assert abs(supported.bottom) <= scene.config.contact_tolerance
                else:
                    supporter = scene.by_id[p.supporter_id]
                    gap = supported.bottom - supporter.top
                    assert abs(gap) <= scene.config.contact_tolerance


class TestIsStable:
    def test_grounded_cube(self):
        scene = make_scene([make_box("A", (0.2, 0.2, 0.2), (0.1, 0.1, 0.1))])
        sm = physics.compute_contacts(scene)
        assert physics.is_stable("A", sm, scene)

    def test_bridge_with_both_supports(self, p1_scene):
        sm = physics.compute_contacts(p1_scene)
        assert physics.is_stable("C", sm, p1_scene)

    def test_bridge_with_one_support(self, p1_scene):
        # recompute contacts with A gone: only B's patch remains under C
        reduced = p1_scene.without({"A"})
        sm = physics.compute_contacts(reduced)
        assert not physics.is_stable("C", sm, reduced)

    def test_missing_box(self, p1_scene):
        sm = physics.compute_contacts(p1_scene)
        with pytest.raises(MissingBox):
            physics.is_stable("zz", sm, p1_scene)

    def test_com_on_boundary_is_stable(self):
        # B's center sits exactly over the right edge of its patch on A
        scene = make_scene([
            make_box("A", (0.2, 0.2, 0.2), (0.1, 0.1, 0.1)),
            make_box("B", (0.2, 0.2, 0.2), (0.2, 0.1, 0.3)),
        ])
        sm = physics.compute_contacts(scene)
        assert physics.is_stable("B", sm, scene)

    def test_positive_margin_rejects_boundary(self):
        cfg = SceneConfig(stability_margin=0.02)
        scene = make_scene([
            make_box("A", (0.2, 0.2, 0.2), (0.1, 0.1, 0.1)),
            make_box("B", (0.2, 0.2, 0.2), (0.2, 0.1, 0.3)),
        ], config=cfg)
        sm = physics.compute_contacts(scene)
        assert not physics.is_stable("B", sm, scene)
        assert physics.is_stable("A", sm, scene)


class TestSettle:
    def test_pyramid_loses_bridge(self, p1_scene):
        report = physics.settle(p1_scene, {"A"})
        assert report.collapsed == ("C",)
        assert report.survivors == ("B",)

    def test_stack_cascades_upward(self, s1_scene):
        report = physics.settle(s1_scene, {"A"})
        assert report.collapsed == ("B", "C")
        assert report.survivors == ()

    def test_no_removal_no_collapse(self, p1_scene, s1_scene):
        for scene in (p1_scene, s1_scene):
            assert physics.settle(scene, frozenset()).collapsed == ()

    def test_unknown_removed_id(self, p1_scene):
        with pytest.raises(MissingBox):
            physics.settle(p1_scene, {"nope"})

    def test_determinism(self, s1_scene):
        runs = [physics.settle(s1_scene, {"A"}) for _ in range(3)]
        assert runs[0] == runs[1] == runs[2]

    def test_monotonicity_on_generated_scenes(self):
        # survivors can only shrink as the removed set grows
        for seed in range(8):
            scene = generate_scene(seed, 7)
            ids = list(scene.ids)
            r1 = {ids[0]}
            r2 = {ids[0], ids[len(ids) // 2]}
            s_small = set(physics.settle(scene, r1).survivors)
            s_large = set(physics.settle(scene, r2 | r1).survivors)
            assert s_large <= s_small

    def test_collapse_propagates_upward(self):
        for seed in range(8):
            scene = generate_scene(seed, 8)
            for target in scene.ids:
                report = physics.settle(scene, {target})
                below = {target}
                for c in report.collapsed:
                    z = scene.by_id[c].center[2]
                    assert any(scene.by_id[b].center[2] < z for b in below)
                    below.add(c)


class TestProbe:
    def test_pyramid_probe(self, p1_scene):
        assert physics.probe_removal(p1_scene, "A") == {"C"}
        assert physics.probe_removal(p1_scene, "C") == frozenset()

    def test_stack_probe(self, s1_scene):
        assert physics.probe_removal(s1_scene, "A") == {"B", "C"}
        assert physics.probe_removal(s1_scene, "C") == frozenset()

    def test_probe_is_pure(self, s1_scene):
        before = s1_scene
        physics.probe_removal(s1_scene, "A")
        assert s1_scene == before and len(s1_scene.boxes) == 3

    def test_missing_box(self, s1_scene):
        with pytest.raises(MissingBox):
            physics.probe_removal(s1_scene, "zz")

    def test_probe_all_matches_individual_probes(self):
        scene = generate_scene(3, 8)
        batched = physics.probe_all_removals(scene)
        for bid in scene.ids:
            assert batched[bid] == physics.probe_removal(scene, bid)


class TestOracleAgreement:
    def test_settle_matches_oracle_on_small_scenes(self):
        for seed in range(30):
            scene = generate_scene(seed, 1 + seed % 6)
            for target in scene.ids:
                engine = frozenset(physics.settle(scene, {target}).collapsed)
                assert engine == oracle_settle(scene, {target}), f"seed {seed}, {target}"

    def test_dependencies_match_oracle(self, p1_scene, s1_scene):
        from shelfplan.brg import build_dependency_dictionary

        for scene in (p1_scene, s1_scene):
            assert dict(build_dependency_dictionary(scene).entries) == oracle_dependencies(scene)
