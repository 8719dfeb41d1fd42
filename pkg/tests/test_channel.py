import json
import math

import numpy as np
import numpy.testing as npt
import pytest

from conftest import face_facing, model_from_faces
from foliage_rt.channel import (
    C,
    Material,
    ScatterModel,
    Scene,
    build_scene,
    fresnel_normal_reflection,
    fspl_db,
    read_paths_csv,
    trace_paths,
    write_paths_csv,
)
from foliage_rt.foliage import CrownParams, generate_foliage
from foliage_rt.metrics import assemble_cir, path_loss_db

DEFAULT_CROWN = CrownParams(area=2.0, volume=600.0, xi=0.1, density=0.25, seed=3)


@pytest.fixture(scope="module")
def tree():
    return generate_foliage(DEFAULT_CROWN)


# -- scene layout -----------------------------------------------------------------


def test_scene_through_tree(tree):
    s = build_scene(DEFAULT_CROWN, 0.0, 60e9, foliage=tree)
    npt.assert_allclose(s.rx, [15, 0, 0], atol=1e-12)
    assert np.linalg.norm(s.rx - s.tx) == pytest.approx(30.0)


def test_scene_backscatter(tree):
    s = build_scene(DEFAULT_CROWN, 180.0, 60e9, foliage=tree)
    npt.assert_allclose(s.rx, [-15, 0, 0], atol=1e-12)


def test_scene_right_angle(tree):
    s = build_scene(DEFAULT_CROWN, 90.0, 60e9, foliage=tree)
    npt.assert_allclose(s.rx, [0, 15, 0], atol=1e-12)
    assert np.linalg.norm(s.rx - s.tx) == pytest.approx(15 * math.sqrt(2))


@pytest.mark.parametrize("alpha", [-1.0, 180.5, 360.0])
def test_scene_rejects_alpha(tree, alpha):
    with pytest.raises(ValueError):
        build_scene(DEFAULT_CROWN, alpha, 60e9, foliage=tree)


def test_scene_colocated_needs_los_suppressed(tree):
    with pytest.raises(ValueError):
        build_scene(DEFAULT_CROWN, 180.0, 60e9, foliage=tree, suppress_los=False)


# -- closed forms -----------------------------------------------------------------


def friis(d, f):
    lam = 299_792_458.0 / f
    return -10 * math.log10((lam / (4 * math.pi * d)) ** 2)


def test_fspl_values():
    assert fspl_db(30, 60e9) == pytest.approx(97.5532, abs=1e-4)
    assert fspl_db(30, 60e9) == pytest.approx(friis(30, 60e9), abs=1e-12)
    assert fspl_db(30, 80e9) == pytest.approx(100.0, abs=0.1)
    assert fspl_db(C / (4 * math.pi * 60e9), 60e9) == pytest.approx(0.0, abs=1e-12)


def test_fresnel():
    assert fresnel_normal_reflection(1.0, 0.0, 60e9) == 0.0
    assert fresnel_normal_reflection(1e12, 0.0, 60e9) > 0.999
    g = fresnel_normal_reflection(17.0, 0.05, 60e9)
    assert 0.60 < g < 0.62
    # conductivity is negligible at mm-wave
    assert g == pytest.approx((math.sqrt(17) - 1) / (math.sqrt(17) + 1), abs=1e-4)
    with pytest.raises(ValueError):
        fresnel_normal_reflection(0.5, 0, 60e9)


def test_material_validation():
    with pytest.raises(ValueError):
        Material(mu_s=1.5)
    with pytest.raises(ValueError):
        ScatterModel(lobe="specular")


# -- tracing -----------------------------------------------------------------------


def single_face_scene(area=2.0, **kw):
    bisector = np.array([-1.0, 1.0, 0.0])  # directions to TX (-x) and to RX (+y) at alpha = 90
    tri = face_facing((0, 0, 0), bisector, area)
    model = model_from_faces(tri[None], area)
    return build_scene(model.params, 90.0, 60e9, foliage=model, **kw)


def test_single_face_closed_form():
    scene = single_face_scene()
    (p,) = trace_paths(scene)
    assert p.tau == pytest.approx(30 / 299_792_458.0, rel=1e-12)
    assert p.tau * 1e9 == pytest.approx(100.069, abs=1e-3)
    lam = 299_792_458.0 / 60e9
    g = fresnel_normal_reflection(17, 0.05, 60e9)
    cos = 1 / math.sqrt(2)
    expected = (lam / (4 * math.pi)) ** 2 * 0.25 * g ** 2 * (2.0 * cos * cos) / (math.pi * 15 ** 4)
    assert p.power == pytest.approx(expected, rel=1e-12)
    assert p.n_occlusions_in == p.n_occlusions_out == 0
    assert np.angle(p.amplitude) == pytest.approx(
        np.angle(np.exp(-2j * math.pi * 60e9 * 30 / 299_792_458.0)), abs=1e-6
    )


def test_antenna_and_calibration_gains_scale_power():
    base = trace_paths(single_face_scene())[0].power
    boosted = trace_paths(single_face_scene(antenna_gain_dbi=3.0, scatter=ScatterModel(calibration_gain_db=4.0)))[0]
    assert 10 * math.log10(boosted.power / base) == pytest.approx(10.0, abs=1e-9)


def test_edge_on_face_contributes_nothing():
    tri = face_facing((0, 0, 0), (0, 0, 1), 2.0)  # normal along z, TX/RX in z=0 plane
    model = model_from_faces(tri[None], 2.0)
    scene = build_scene(model.params, 90.0, 60e9, foliage=model)
    assert trace_paths(scene) == []


def test_los_only_scene():
    tree = generate_foliage(DEFAULT_CROWN.replace(density=0.0))
    scene = build_scene(tree.params, 0.0, 60e9, foliage=tree, suppress_los=False)
    (p,) = trace_paths(scene)
    assert p.face_index == -1
    assert -10 * math.log10(p.power) == pytest.approx(fspl_db(30, 60e9), abs=1e-9)
    cir = assemble_cir([p], 2e9)
    assert path_loss_db(cir) == pytest.approx(-fspl_db(30, 60e9), abs=0.05)


def test_empty_suppressed_scene():
    tree = generate_foliage(DEFAULT_CROWN.replace(density=0.0))
    assert trace_paths(build_scene(tree.params, 0.0, 60e9, foliage=tree)) == []


def segment_hits(a, b, tris, skip):
    """Brute-force count of triangles crossed by the open segment a-b."""
    count = 0
    d = b - a
    for k, (p0, p1, p2) in enumerate(tris):
        if k == skip:
            continue
        n = np.cross(p1 - p0, p2 - p0)
        denom = n @ d
        if abs(denom) < 1e-12:
            continue
        s = n @ (p0 - a) / denom
        if not (1e-6 / np.linalg.norm(d) < s < 1 - 1e-6 / np.linalg.norm(d)):
            continue
        x = a + s * d
        w = [np.cross(q1 - q0, x - q0) @ n for q0, q1 in ((p0, p1), (p1, p2), (p2, p0))]
        count += all(wi >= 0 for wi in w)
    return count


def test_occlusion_counts_against_brute_force():
    rng = np.random.default_rng(4)
    tx = np.array([-15.0, 0, 0])
    base = [face_facing(rng.uniform(-4, 4, 3), rng.normal(size=3), 0.5) for _ in range(12)]
    # duplicates: half moved 1 m toward TX along the incoming segment, half well off any path
    dups = []
    for i, tri in enumerate(base):
        q = tri.mean(axis=0)
        if i % 2 == 0:
            shift = (tx - q) / np.linalg.norm(tx - q)
        else:
            shift = np.array([0.0, 0.0, 40.0])
        dups.append(tri + shift)
    tris = np.array(base + dups)
    model = model_from_faces(tris, 0.5, envelope_radius=60.0)
    open_scene = build_scene(model.params, 90.0, 60e9, foliage=model, scatter=ScatterModel(occlusion_loss_db=0.0))
    lossy = build_scene(model.params, 90.0, 60e9, foliage=model, scatter=ScatterModel(occlusion_loss_db=3.0))
    free = {p.face_index: p for p in trace_paths(open_scene)}
    for p in trace_paths(lossy):
        q = tris[p.face_index].mean(axis=0)
        k_in = segment_hits(lossy.tx, q, tris, p.face_index)
        k_out = segment_hits(q, lossy.rx, tris, p.face_index)
        assert (p.n_occlusions_in, p.n_occlusions_out) == (k_in, k_out)
        ratio_db = 10 * math.log10(p.power / free[p.face_index].power)
        assert ratio_db == pytest.approx(-3.0 * (k_in + k_out), abs=1e-9)
    # every even-indexed original gained its duplicate on the incoming segment
    for i in range(0, 12, 2):
        if i in free:
            assert free[i].n_occlusions_in >= 1


def test_path_count_bound(tree):
    scene = build_scene(DEFAULT_CROWN, 45.0, 60e9, foliage=tree)
    assert len(trace_paths(scene)) <= tree.n_scatterers
    far = build_scene(DEFAULT_CROWN, 45.0, 60e9, foliage=tree, suppress_los=False)
    assert len(trace_paths(far)) <= tree.n_scatterers + 1


def test_reciprocity(tree):
    scene = build_scene(DEFAULT_CROWN, 60.0, 80e9, foliage=tree)
    fwd = sorted((p.face_index, p.tau, abs(p.amplitude)) for p in trace_paths(scene))
    back = sorted((p.face_index, p.tau, abs(p.amplitude)) for p in trace_paths(scene.swapped()))
    assert [f for f, *_ in fwd] == [f for f, *_ in back]
    npt.assert_allclose([t for _, t, _ in fwd], [t for _, t, _ in back], rtol=0, atol=1e-20)
    npt.assert_allclose([a for *_, a in fwd], [a for *_, a in back], rtol=1e-12, atol=0)


def test_doubling_distances(tree):
    tris = tree.scatterers.faces
    q = tris.mean(axis=1, keepdims=True)
    scaled_tris = tris - q + 2 * q  # positions doubled, faces unchanged in size
    m1 = model_from_faces(tris, 2.0, envelope_radius=30)
    m2 = model_from_faces(scaled_tris, 2.0, envelope_radius=30)
    opts = dict(scatter=ScatterModel(occlusion_loss_db=0.0))
    s1 = build_scene(m1.params, 30.0, 60e9, foliage=m1, **opts)
    s2 = build_scene(m2.params, 30.0, 60e9, foliage=m2, tx_distance=30.0, rx_radius=30.0, **opts)
    p1 = {p.face_index: p for p in trace_paths(s1)}
    p2 = {p.face_index: p for p in trace_paths(s2)}
    assert p1.keys() == p2.keys() and len(p1) > 100
    for k in p1:
        assert 10 * math.log10(p2[k].power / p1[k].power) == pytest.approx(-20 * math.log10(2) * 2, abs=1e-9)
        assert p2[k].tau == pytest.approx(2 * p1[k].tau, rel=1e-12)


def test_amplitudes_monotone_in_transmission(tree):
    prev = None
    for loss in (0.0, 1.0, 2.0, 5.0, 10.0):
        scene = build_scene(DEFAULT_CROWN, 0.0, 60e9, foliage=tree, scatter=ScatterModel(occlusion_loss_db=loss))
        amps = {p.face_index: abs(p.amplitude) for p in trace_paths(scene)}
        if prev is not None:
            assert all(amps[k] <= prev[k] for k in amps)
            assert any(amps[k] < prev[k] for k in amps)
        prev = amps


def test_trace_deterministic(tree):
    scene = build_scene(DEFAULT_CROWN, 105.0, 60e9, foliage=tree)
    assert trace_paths(scene) == trace_paths(scene)


def test_scene_json_round_trip(tmp_path, tree):
    scene = build_scene(DEFAULT_CROWN, 75.0, 80e9, foliage=tree, antenna_gain_dbi=24.8)
    scene.to_json(tmp_path / "scene.json")
    doc = json.loads((tmp_path / "scene.json").read_text())
    assert doc["f_c"] == 80e9 and doc["material"]["eps_r"] == 17.0
    back = Scene.from_json(tmp_path / "scene.json")
    assert trace_paths(back) == trace_paths(scene)


def test_paths_csv_round_trip(tmp_path, tree):
    paths = trace_paths(build_scene(DEFAULT_CROWN, 15.0, 60e9, foliage=tree))
    write_paths_csv(tmp_path / "paths.csv", paths)
    assert read_paths_csv(tmp_path / "paths.csv") == paths
