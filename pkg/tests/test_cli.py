import json

import numpy as np
import pytest

from pavecrack.cli import main
from pavecrack.raster import load_mask, load_pgm, save_pgm
from pavecrack.synth import CrackSpec, StripeSpec, SyntheticSceneSpec, generate_scene

# small scales keep CLI-level pipeline runs fast
FAST_CONFIG = """
bottomhat.radius = 8
voting.sigma_ball = 3.0
voting.sigma_stick1 = 3.0
voting.sigma_stick2 = 8.0
cleanup.min_area = 20
"""


def small_scene_spec(**kwargs):
    base = dict(
        width=120,
        height=100,
        background=0.75,
        noise=0.01,
        cracks=[
            {"points": [[15, 20], [60, 50], [105, 80]], "width": 6.0, "intensity": 0.25}
        ],
        specks=15,
        speck_size=3,
        speck_intensity=0.3,
        speck_spacing=12.0,
        seed=9,
    )
    base.update(kwargs)
    return base


@pytest.fixture
def workdir(tmp_path):
    (tmp_path / "scene.json").write_text(json.dumps(small_scene_spec()))
    (tmp_path / "fast.cfg").write_text(FAST_CONFIG)
    return tmp_path


def run(args):
    return main([str(a) for a in args])


class TestSynthCommand:
    def test_outputs_and_determinism(self, workdir):
        a1, t1 = workdir / "a1.pgm", workdir / "t1.pgm"
        a2, t2 = workdir / "a2.pgm", workdir / "t2.pgm"
        assert run(["synth", "--spec", workdir / "scene.json", "--output", a1, "--truth", t1]) == 0
        assert run(["synth", "--spec", workdir / "scene.json", "--output", a2, "--truth", t2]) == 0
        assert a1.read_bytes() == a2.read_bytes()
        assert t1.read_bytes() == t2.read_bytes()

    def test_zero_cracks_empty_truth(self, workdir):
        spec = workdir / "empty.json"
        spec.write_text(json.dumps(small_scene_spec(cracks=[], specks=0)))
        truth = workdir / "t.pgm"
        assert run(["synth", "--spec", spec, "--output", workdir / "o.pgm", "--truth", truth]) == 0
        assert not load_mask(truth).any()

    def test_seed_override(self, workdir):
        o1, o2 = workdir / "s1.pgm", workdir / "s2.pgm"
        run(["synth", "--spec", workdir / "scene.json", "--output", o1, "--truth", workdir / "x.pgm", "--seed", 1])
        run(["synth", "--spec", workdir / "scene.json", "--output", o2, "--truth", workdir / "y.pgm", "--seed", 2])
        assert o1.read_bytes() != o2.read_bytes()

    def test_bad_spec(self, workdir, capsys):
        bad = workdir / "bad.json"
        bad.write_text('{"width": 10, "height": 10, "bogus": 3}')
        assert run(["synth", "--spec", bad, "--output", workdir / "o.pgm", "--truth", workdir / "t.pgm"]) != 0
        err = capsys.readouterr().err
        assert err.startswith("pavecrack: error:") and err.count("\n") == 1


class TestDetectCommand:
    def test_detect_on_synthetic_scene(self, workdir, capsys):
        scene_img = workdir / "scene.pgm"
        truth = workdir / "truth.pgm"
        run(["synth", "--spec", workdir / "scene.json", "--output", scene_img, "--truth", truth])
        mask_out = workdir / "mask.pgm"
        report_out = workdir / "report.json"
        code = run(["detect", "--input", scene_img, "--output", mask_out, "--report", report_out])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["config"]["bottomhat.radius"] == 15.0
        assert set(report["timings_ms"]) == set(report["stages"])
        assert json.loads(report_out.read_text()) == report
        det = load_mask(mask_out)
        ref = load_mask(truth)
        from pavecrack.evaluation import sm_score

        assert sm_score(det, ref, 2.0) >= 90.0

    def test_all_background_empty_mask(self, workdir):
        img = workdir / "flat.pgm"
        save_pgm(np.zeros((40, 40)), img)
        out = workdir / "m.pgm"
        assert run(["detect", "--input", img, "--output", out, "--config", workdir / "fast.cfg"]) == 0
        assert not load_mask(out).any()

    def test_missing_input(self, workdir, capsys):
        code = run(["detect", "--input", workdir / "nope.pgm", "--output", workdir / "m.pgm"])
        assert code != 0
        err = capsys.readouterr().err
        assert "nope.pgm" in err and err.count("\n") == 1

    def test_no_timings_reports_identical(self, workdir, capsys):
        img = workdir / "scene.pgm"
        run(["synth", "--spec", workdir / "scene.json", "--output", img, "--truth", workdir / "t.pgm"])
        reports = []
        for name in ("r1.json", "r2.json"):
            run([
                "detect", "--input", img, "--output", workdir / "m.pgm",
                "--config", workdir / "fast.cfg", "--report", workdir / name, "--no-timings",
            ])
            reports.append((workdir / name).read_bytes())
        capsys.readouterr()
        assert reports[0] == reports[1]

    def test_dump_saliency(self, workdir, capsys):
        img = workdir / "scene.pgm"
        run(["synth", "--spec", workdir / "scene.json", "--output", img, "--truth", workdir / "t.pgm"])
        dump = workdir / "sal"
        code = run([
            "detect", "--input", img, "--output", workdir / "m.pgm",
            "--config", workdir / "fast.cfg", "--dump-saliency", dump,
        ])
        assert code == 0
        capsys.readouterr()
        written = sorted(p.name for p in dump.glob("*.pgm"))
        assert "round1_ball_stick.pgm" in written and "round1_ball_ball.pgm" in written


class TestEvaluateCommand:
    def test_identical_masks(self, workdir, capsys):
        m = workdir / "m.pgm"
        mask = np.zeros((30, 30), dtype=bool)
        mask[10:12, 5:25] = True
        save_pgm(mask, m)
        assert run(["evaluate", "--input", m, "--reference", m]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["sm"] == 100.0 and doc["hausdorff"] == 0.0
        assert doc["sm_definition"] == "buffered-match"

    def test_near_miss_matches_library(self, workdir, capsys):
        from pavecrack.evaluation import evaluate

        a = np.zeros((30, 30), dtype=bool)
        a[10, 5:25] = True
        b = np.zeros_like(a)
        b[12, 5:25] = True
        pa, pb = workdir / "a.pgm", workdir / "b.pgm"
        save_pgm(a, pa)
        save_pgm(b, pb)
        run(["evaluate", "--input", pa, "--reference", pb, "--tau", 2.5])
        doc = json.loads(capsys.readouterr().out)
        ref = evaluate(a, b, tau=2.5)
        assert doc["sm"] == ref.sm and doc["hausdorff"] == ref.hausdorff

    def test_dimension_mismatch(self, workdir, capsys):
        pa, pb = workdir / "a.pgm", workdir / "b.pgm"
        save_pgm(np.ones((5, 5), dtype=bool), pa)
        save_pgm(np.ones((6, 6), dtype=bool), pb)
        assert run(["evaluate", "--input", pa, "--reference", pb]) != 0
        assert "dimensions" in capsys.readouterr().err

    def test_csv_append(self, workdir, capsys):
        m = workdir / "m.pgm"
        mask = np.zeros((20, 20), dtype=bool)
        mask[5:7, 5:15] = True
        save_pgm(mask, m)
        csv_path = workdir / "scores.csv"
        run(["evaluate", "--input", m, "--reference", m, "--csv", csv_path])
        run(["evaluate", "--input", m, "--reference", m, "--csv", csv_path])
        capsys.readouterr()
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0].startswith("detected,reference,tau")
        assert len(lines) == 3

    def test_figures_rendered(self, workdir, capsys):
        m = workdir / "m.pgm"
        mask = np.zeros((20, 20), dtype=bool)
        mask[5:7, 5:15] = True
        save_pgm(mask, m)
        figdir = workdir / "figs"
        assert run(["evaluate", "--input", m, "--reference", m, "--figures", figdir]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert (figdir / "evaluate_overlay.png").exists()
        assert doc["figures"]


class TestStageCommand:
    def test_median_stage(self, workdir):
        img = workdir / "img.pgm"
        noisy = np.zeros((20, 20))
        noisy[10, 10] = 1.0
        save_pgm(noisy, img)
        out = workdir / "out.pgm"
        assert run(["stage", "--stage", "median", "--input", img, "--output", out]) == 0
        assert load_pgm(out)[10, 10] == 0.0

    def test_bottomhat_removes_lane_marking(self, workdir):
        spec = SyntheticSceneSpec(
            width=160, height=80, background=0.8, noise=0.0,
            cracks=(CrackSpec(points=((10, 40), (80, 40)), width=8.0, intensity=0.2),),
            stripes=(StripeSpec(position=110, width=40, intensity=0.95),),
        )
        scene = generate_scene(spec)
        img = workdir / "lane.pgm"
        save_pgm(scene.image, img)
        out = workdir / "bh.pgm"
        assert run(["stage", "--stage", "bottomhat", "--input", img, "--output", out]) == 0
        resp = load_pgm(out)
        assert resp[:, 112:148].mean() <= 0.05  # marking suppressed
        assert resp[scene.crack_mask].mean() >= 0.4  # crack enhanced

    def test_binarize_beats_otsu_on_gradient(self, workdir):
        spec = SyntheticSceneSpec(
            width=200, height=160, background=0.5, noise=0.015, gradient=0.7,
            cracks=(CrackSpec(points=((15, 120), (100, 80), (185, 40)), width=6.0, intensity=0.12, relative=True),),
            seed=11,
        )
        scene = generate_scene(spec)
        img = workdir / "grad.pgm"
        save_pgm(scene.image, img)
        singh_out, otsu_out = workdir / "s.pgm", workdir / "o.pgm"
        assert run(["stage", "--stage", "binarize", "--input", img, "--output", singh_out]) == 0
        assert run(["stage", "--stage", "otsu", "--input", img, "--output", otsu_out]) == 0
        truth = scene.crack_mask
        recall_singh = (load_mask(singh_out) & truth).sum() / truth.sum()
        recall_otsu = (load_mask(otsu_out) & truth).sum() / truth.sum()
        assert recall_singh >= recall_otsu + 0.20

    def test_enhance_stage(self, workdir):
        mask = np.zeros((60, 60), dtype=bool)
        mask[30, 5:55] = True
        mask[10, 10] = mask[50, 45] = True
        m = workdir / "mask.pgm"
        save_pgm(mask, m)
        out = workdir / "enh.pgm"
        assert run(["stage", "--stage", "enhance", "--input", m, "--output", out, "--config", workdir / "fast.cfg"]) == 0
        enhanced = load_mask(out)
        assert enhanced[30, 20:40].all()
        assert not enhanced[10, 10] and not enhanced[50, 45]

    def test_unknown_stage(self, workdir, capsys):
        with pytest.raises(SystemExit) as exc:
            run(["stage", "--stage", "sharpen", "--input", "x", "--output", "y"])
        assert exc.value.code != 0
        capsys.readouterr()
