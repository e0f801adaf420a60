"""End-to-end CLI behavior through the click runner."""

import json

import numpy as np
import pytest
from click.testing import CliRunner

from lldet.cli import cli, parse_train_config
from lldet.datasets import read_ppm, write_ppm
from lldet.errors import InvalidConfigError
from lldet.pixelops import RasterImage, enhance_he
from lldet.toydata import make_domains


@pytest.fixture
def runner():
    return CliRunner()


def write_images(root, images, prefix="img"):
    root.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, img in enumerate(images):
        p = root / f"{prefix}{i:02d}.ppm"
        p.write_bytes(write_ppm(img))
        paths.append(p)
    return paths


def toy_images(n=3, size=8, seed=0):
    rng = np.random.default_rng(seed)
    return [
        RasterImage.from_array(rng.integers(0, 200, (size, size, 3), dtype=np.uint8))
        for _ in range(n)
    ]


TRAIN_CONFIG = """
# toy run
arch = resnet9
base = 4
n_blocks = 1
steps = 3
batch_size = 2
seed = 7
image_size = 8
pool_size = 2
"""


class TestEnhance:
    def test_he_golden_directory(self, runner, tmp_path, datadir):
        in_dir = tmp_path / "in"
        out_dir = tmp_path / "out"
        in_dir.mkdir()
        (in_dir / "fixture.ppm").write_bytes((datadir / "he_input_4x4.ppm").read_bytes())
        result = runner.invoke(
            cli, ["enhance", "--method", "he", "--in-dir", str(in_dir), "--out-dir", str(out_dir)]
        )
        assert result.exit_code == 0, result.output
        produced = (out_dir / "fixture.ppm").read_bytes()
        assert produced == (datadir / "he_golden_4x4.ppm").read_bytes()
        manifest = json.loads((out_dir / "run-manifest.json").read_text())
        assert manifest["command"] == "enhance"

    def test_he_matches_library_call(self, runner, tmp_path):
        imgs = toy_images()
        in_dir = tmp_path / "in"
        write_images(in_dir, imgs)
        out_dir = tmp_path / "out"
        result = runner.invoke(
            cli, ["enhance", "--method", "he", "--in-dir", str(in_dir), "--out-dir", str(out_dir)]
        )
        assert result.exit_code == 0
        for i, img in enumerate(imgs):
            got = read_ppm((out_dir / f"img{i:02d}.ppm").read_bytes())
            assert np.array_equal(got.to_array(), enhance_he(img).to_array())

    def test_cyclegan_requires_weights(self, runner, tmp_path):
        in_dir = tmp_path / "in"
        write_images(in_dir, toy_images(1))
        result = runner.invoke(
            cli, ["enhance", "--method", "cyclegan", "--in-dir", str(in_dir), "--out-dir", str(tmp_path / "o")]
        )
        assert result.exit_code == 2

    def test_empty_input_dir_fails(self, runner, tmp_path):
        in_dir = tmp_path / "empty"
        in_dir.mkdir()
        result = runner.invoke(
            cli, ["enhance", "--method", "he", "--in-dir", str(in_dir), "--out-dir", str(tmp_path / "o")]
        )
        assert result.exit_code == 4
        assert "no inputs" in result.output

    def test_arch_mismatch_fails(self, runner, tmp_path, datadir):
        in_dir = tmp_path / "in"
        write_images(in_dir, toy_images(1))
        result = runner.invoke(
            cli,
            [
                "enhance", "--method", "cyclegan",
                "--in-dir", str(in_dir), "--out-dir", str(tmp_path / "o"),
                "--weights", str(datadir / "toy_resnet_g_ab.weights"),
                "--arch", "unet256",
            ],
        )
        assert result.exit_code == 4

    def test_cyclegan_translates_dir(self, runner, tmp_path, datadir):
        in_dir = tmp_path / "in"
        in_dir.mkdir()
        (in_dir / "a.ppm").write_bytes((datadir / "translate_input_8x8.ppm").read_bytes())
        out_dir = tmp_path / "out"
        result = runner.invoke(
            cli,
            [
                "enhance", "--method", "cyclegan",
                "--in-dir", str(in_dir), "--out-dir", str(out_dir),
                "--weights", str(datadir / "toy_resnet_g_ab.weights"),
                "--arch", "resnet9",
            ],
        )
        assert result.exit_code == 0, result.output
        assert (out_dir / "a.ppm").read_bytes() == (datadir / "translate_golden_8x8.ppm").read_bytes()

    def test_hist_reports_emitted(self, runner, tmp_path):
        in_dir = tmp_path / "in"
        write_images(in_dir, toy_images(1))
        hist_dir = tmp_path / "hist"
        result = runner.invoke(
            cli,
            [
                "enhance", "--method", "he", "--in-dir", str(in_dir),
                "--out-dir", str(tmp_path / "o"), "--hist-dir", str(hist_dir),
            ],
        )
        assert result.exit_code == 0
        before = (hist_dir / "img00.before.csv").read_text()
        assert before.startswith("bin,count\n")
        assert (hist_dir / "img00.after.csv").exists()


class TestTrainCommand:
    def _write_domains(self, tmp_path):
        dom_a, dom_b = make_domains(4, 8, np.random.default_rng(3))
        write_images(tmp_path / "a", dom_a)
        write_images(tmp_path / "b", dom_b)
        return tmp_path / "a", tmp_path / "b"

    def test_train_writes_weights_metrics_manifest(self, runner, tmp_path):
        a_dir, b_dir = self._write_domains(tmp_path)
        cfg = tmp_path / "cfg.txt"
        cfg.write_text(TRAIN_CONFIG)
        out = tmp_path / "gen.weights"
        result = runner.invoke(
            cli,
            ["train", "--config", str(cfg), "--domain-a", str(a_dir), "--domain-b", str(b_dir), "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        assert out.exists()
        metrics = (tmp_path / "gen.weights.metrics.csv").read_text()
        assert metrics.splitlines()[0] == "step,loss_G,loss_D_A,loss_D_B,cycle,idt"
        assert len(metrics.strip().splitlines()) == 4
        manifest = json.loads((tmp_path / "gen.weights.manifest.json").read_text())
        assert manifest["seed"] == 7

    def test_same_seed_bit_identical_outputs(self, runner, tmp_path):
        a_dir, b_dir = self._write_domains(tmp_path)
        cfg = tmp_path / "cfg.txt"
        cfg.write_text(TRAIN_CONFIG)
        payloads = []
        for run in ("one", "two"):
            out = tmp_path / f"{run}.weights"
            result = runner.invoke(
                cli,
                ["train", "--config", str(cfg), "--domain-a", str(a_dir), "--domain-b", str(b_dir), "--out", str(out)],
            )
            assert result.exit_code == 0
            payloads.append(
                (out.read_bytes(), (tmp_path / f"{run}.weights.metrics.csv").read_text())
            )
        assert payloads[0] == payloads[1]

    def test_epochs_zero_equals_initialization(self, runner, tmp_path):
        a_dir, b_dir = self._write_domains(tmp_path)
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("arch = resnet9\nbase = 4\nn_blocks = 1\nepochs = 0\nseed = 7\nimage_size = 8\n")
        out = tmp_path / "init.weights"
        result = runner.invoke(
            cli,
            ["train", "--config", str(cfg), "--domain-a", str(a_dir), "--domain-b", str(b_dir), "--out", str(out)],
        )
        assert result.exit_code == 0
        from lldet.gan import Network, WeightStore, build_resnet9_generator, load_weights

        loaded = load_weights(out.read_bytes())
        fresh = WeightStore.from_network(
            Network.initialized(build_resnet9_generator(3, 4, 1), np.random.default_rng(7))
        )
        for name in fresh.params:
            assert np.array_equal(loaded.params[name], fresh.params[name])

    def test_invalid_config_names_field(self, runner, tmp_path):
        a_dir, b_dir = self._write_domains(tmp_path)
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("batch_size = -3\n")
        result = runner.invoke(
            cli,
            ["train", "--config", str(cfg), "--domain-a", str(a_dir), "--domain-b", str(b_dir), "--out", str(tmp_path / "x")],
        )
        assert result.exit_code == 4
        assert "batch_size" in result.output

    def test_config_parser_rejects_unknown_key(self):
        with pytest.raises(InvalidConfigError):
            parse_train_config("mystery = 3\n")

    def test_config_parser_values(self):
        cfg = parse_train_config("# c\nlr = 0.001\nepochs = 2\narch = unet256\n")
        assert cfg == {"lr": 0.001, "epochs": 2, "arch": "unet256"}


def detections_payload(image_id, box, score=0.9, name="cat"):
    return {
        "image_id": image_id,
        "class_name": name,
        "bbox": list(box),
        "score": score,
    }


class TestEvalCommand:
    def _write_gt(self, root, boxes):
        root.mkdir(parents=True, exist_ok=True)
        for image_id, lines in boxes.items():
            (root / f"{image_id}.txt").write_text("\n".join(lines) + "\n")

    def test_perfect_scene_map_one(self, runner, tmp_path):
        gt_dir = tmp_path / "gt"
        self._write_gt(gt_dir, {"im1": ["Cat 10 10 20 20 0"]})
        det_file = tmp_path / "dets.json"
        det_file.write_text(json.dumps([detections_payload("im1", [10, 10, 20, 20])]))
        out_json = tmp_path / "report.json"
        result = runner.invoke(
            cli,
            [
                "eval", "--gt-dir", str(gt_dir), "--detections", str(det_file),
                "--protocol", "voc50", "--out-json", str(out_json),
                "--pr-csv", str(tmp_path / "pr.csv"),
            ],
        )
        assert result.exit_code == 0, result.output
        assert "mAP: 1.000000" in result.output
        report = json.loads(out_json.read_text())
        assert report["map"] == 1.0
        assert (tmp_path / "pr.csv").read_text().startswith("class,threshold")

    def test_unknown_image_ids_fail_with_list(self, runner, tmp_path):
        gt_dir = tmp_path / "gt"
        self._write_gt(gt_dir, {"im1": ["Cat 10 10 20 20"]})
        det_file = tmp_path / "dets.json"
        det_file.write_text(json.dumps([detections_payload("ghost", [1, 1, 2, 2])]))
        result = runner.invoke(
            cli,
            ["eval", "--gt-dir", str(gt_dir), "--detections", str(det_file), "--out-json", str(tmp_path / "r.json")],
        )
        assert result.exit_code == 4
        assert "ghost" in result.output

    def test_malformed_detections_exit_three(self, runner, tmp_path):
        gt_dir = tmp_path / "gt"
        self._write_gt(gt_dir, {"im1": ["Cat 10 10 20 20"]})
        det_file = tmp_path / "dets.json"
        det_file.write_text("{not json")
        result = runner.invoke(
            cli,
            ["eval", "--gt-dir", str(gt_dir), "--detections", str(det_file), "--out-json", str(tmp_path / "r.json")],
        )
        assert result.exit_code == 3

    def test_same_inputs_bit_identical_reports(self, runner, tmp_path):
        gt_dir = tmp_path / "gt"
        self._write_gt(gt_dir, {"im1": ["Cat 10 10 20 20", "Dog 5 5 10 10"]})
        det_file = tmp_path / "dets.json"
        det_file.write_text(
            json.dumps(
                [
                    detections_payload("im1", [11, 11, 20, 20], 0.8),
                    detections_payload("im1", [5, 5, 10, 10], 0.7, name="dog"),
                ]
            )
        )
        texts = []
        for run in ("one", "two"):
            out_json = tmp_path / f"{run}.json"
            pr = tmp_path / f"{run}.csv"
            result = runner.invoke(
                cli,
                [
                    "eval", "--gt-dir", str(gt_dir), "--detections", str(det_file),
                    "--protocol", "coco", "--out-json", str(out_json), "--pr-csv", str(pr),
                ],
            )
            assert result.exit_code == 0
            texts.append((out_json.read_text(), pr.read_text()))
        assert texts[0] == texts[1]


class TestReportHist:
    def test_stdout_csv(self, runner, tmp_path):
        img_path = tmp_path / "x.ppm"
        img_path.write_bytes(write_ppm(toy_images(1)[0]))
        result = runner.invoke(cli, ["report-hist", str(img_path)])
        assert result.exit_code == 0
        assert result.output.startswith("bin,count\n")
        assert len(result.output.strip().splitlines()) == 257

    def test_file_output(self, runner, tmp_path):
        img_path = tmp_path / "x.ppm"
        img_path.write_bytes(write_ppm(toy_images(1)[0]))
        out = tmp_path / "hist.csv"
        result = runner.invoke(cli, ["report-hist", str(img_path), "--out", str(out)])
        assert result.exit_code == 0
        assert out.read_text().startswith("bin,count\n")

    def test_bad_ppm_exit_three(self, runner, tmp_path):
        bad = tmp_path / "bad.ppm"
        bad.write_bytes(b"P5 1 1 255 \x00")
        result = runner.invoke(cli, ["report-hist", str(bad)])
        assert result.exit_code == 3
