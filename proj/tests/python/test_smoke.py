import csv
import json

import numpy as np
import pytest

import flairkit as fk


def sphere(shape, centre, radius):
    idx = np.indices(shape).astype(float)
    d2 = sum((idx[a] - centre[a]) ** 2 for a in range(3))
    return (d2 <= radius * radius).astype(np.uint8)


def test_default_config_constants():
    cfg = fk.default_config()
    assert cfg["detection"]["positive_threshold_ml"] == 0.1
    assert cfg["component_filter"]["min_ml"] == 0.05
    assert len(cfg["thresholds"]) == 10
    assert cfg["sliding_window"]["patch_size"] == [160, 160, 160]


def test_volume_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    vol = rng.random((12, 10, 8), dtype=np.float32)
    fk.save_volume(tmp_path / "v.nii.gz", vol, spacing=(0.5, 1.0, 2.0), origin=(1, 2, 3))
    back, spacing, origin = fk.load_volume(tmp_path / "v.nii.gz")
    assert back.shape == vol.shape
    np.testing.assert_array_equal(back, vol)
    assert spacing == pytest.approx((0.5, 1.0, 2.0))
    assert origin == pytest.approx((1, 2, 3))
    with pytest.raises(fk.NiftiError):
        fk.load_volume(tmp_path / "missing.nii")


def test_preprocess_and_normalize():
    vol = np.zeros((30, 30, 20), dtype=np.float32)
    vol[5:25, 5:25, 4:16] = np.linspace(1, 5, 20 * 20 * 12, dtype=np.float32).reshape(20, 20, 12)
    out, meta = fk.preprocess(vol, spacing=(1.0, 1.0, 2.0))
    assert out.shape[2] >= 24
    assert "crop" in meta
    z = fk.normalize_nonzero(vol)
    nz = vol != 0
    assert np.all(z[~nz] == 0)
    assert z[nz].std() == pytest.approx(1.0, abs=1e-4)
    assert fk.resample(vol, (1, 1, 1), (1, 1, 1)).shape == vol.shape


def test_tiles_and_inference():
    assert len(fk.plan_tiles((240, 240, 240))["windows"]) == 8
    prob = fk.infer(np.zeros((40, 36, 30), dtype=np.float32), "sphere:20,18,15,6", patch_size=(16, 16, 16))
    np.testing.assert_array_equal(prob, sphere((40, 36, 30), (20, 18, 15), 6).astype(np.float32))


def test_postprocess_and_metrics():
    gt = sphere((24, 24, 24), (12, 12, 12), 5)
    labels = fk.connected_components(gt, connectivity=6)
    assert labels.max() == 1
    noisy = gt.copy()
    noisy[0, 0, 0] = 1
    filtered = fk.filter_small_components(noisy)
    np.testing.assert_array_equal(filtered, gt)
    assert fk.dice(gt, gt) == 1.0
    shifted = np.roll(gt, 2, axis=0)
    assert fk.dice(gt, shifted) == fk.oracle.dice(gt, shifted)
    assert fk.hd95(gt, shifted) == pytest.approx(fk.oracle.hd95(gt, shifted), abs=1e-9)
    mask = fk.binarize(gt.astype(np.float32) * 0.6, 0.5)
    np.testing.assert_array_equal(mask, gt)
    ev = fk.evaluate_case(gt.astype(np.float32), gt)
    assert ev["outcome"] == "TP"
    assert ev["dice"] == 1.0


def test_stats():
    assert fk.percentile([1.34, 3.30, 6.89], 50) == pytest.approx(3.30)
    assert fk.median_iqr([1.34, 3.30, 6.89])[3] == "3.30 [1.34-6.89]"
    assert fk.median_iqr([]) is None
    with pytest.raises(fk.FlairkitError):
        fk.percentile([], 50)


def test_phantom_cohort_evaluation(tmp_path):
    rows = []
    for i in range(4):
        spec = {"dims": [24, 24, 24], "ellipsoids": [{"center": [12, 12, 12], "radius": 3 + i}], "seed": i}
        vol, mask = fk.make_phantom(spec)
        assert vol.shape == mask.shape == (24, 24, 24)
        fk.save_mask(tmp_path / f"gt{i}.nii.gz", mask)
        fk.save_volume(tmp_path / f"p{i}.nii.gz", mask.astype(np.float32))
        rows.append([f"c{i}", f"p{i}", "A", "Gli", "pre", "FH", f"gt{i}.nii.gz", f"p{i}.nii.gz", "", "", mask.sum() / 1000])
    manifest = tmp_path / "manifest.csv"
    with open(manifest, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["case_id", "patient_id", "source_group", "tumor_type", "time_point", "target", "gt_path",
                    "prob_path", "tumor_mask_path", "brain_mask_path", "gt_ml"])
        w.writerows(rows)
    plan = fk.stratified_split(manifest, k=2, seed=1)
    assert sorted(plan["assignment"]) == ["p0", "p1", "p2", "p3"]
    assert fk.evaluate_manifest(manifest, tmp_path / "out")
    meta = json.loads((tmp_path / "out" / "metadata.json").read_text())
    assert meta["n_evaluated"] == 4
    assert "| Gli_A_pre | FH | 100.00 | 100.00±00.00" in (tmp_path / "out" / "table.md").read_text()
