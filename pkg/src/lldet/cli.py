"""Command-line front end: enhance -> (external detection) -> eval.

Exit codes: 0 success, 2 usage errors, 3 parse/format errors,
4 validation and precondition errors, 1 anything unexpected.
Every successful run writes a JSON manifest next to its primary output.
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click

from . import __version__
from .datasets import (
    default_class_table,
    load_annotation_dir,
    parse_detections,
    read_ppm,
    write_ppm,
)
from .errors import (
    FormatError,
    InvalidConfigError,
    LldetError,
    ParseError,
    ValidationError,
)
from .evalmap import EvalConfig, evaluate
from .gan import TrainConfig, build_generator, load_weights, metrics_csv
from .gan import save_weights as encode_weights
from .gan import train as run_training
from .gan import translate
from .pixelops import enhance_he, histogram_csv, histogram_report
from .tensor import BACKEND


class _ParseFailure(click.ClickException):
    exit_code = 3


class _ValidationFailure(click.ClickException):
    exit_code = 4


def _raise_cli(exc: LldetError):
    if isinstance(exc, (ParseError, FormatError)):
        raise _ParseFailure(str(exc)) from exc
    raise _ValidationFailure(str(exc)) from exc


def _write_manifest(path: Path, command: str, config: dict, inputs: list, outputs: list, seed=None, started=None):
    payload = {
        "command": command,
        "config": config,
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "seed": seed,
        "tool_version": __version__,
        "backend": BACKEND,
        "wall_time_s": None if started is None else round(time.monotonic() - started, 3),
    }
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


@click.group()
@click.version_option(__version__)
def cli():
    """Low-light enhancement and detection-evaluation toolkit."""


@cli.command("enhance")
@click.option("--method", type=click.Choice(["he", "cyclegan"]), required=True)
@click.option("--in-dir", "in_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--out-dir", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--weights", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Weight file (required for --method cyclegan).")
@click.option("--arch", type=click.Choice(["resnet9", "unet256"]), default=None,
              help="Expected generator architecture, cross-checked against the weights.")
@click.option("--hist-dir", type=click.Path(file_okay=False), default=None,
              help="Also emit per-image before/after histogram CSVs here.")
def cmd_enhance(method, in_dir, out_dir, weights, arch, hist_dir):
    """Enhance every PPM in IN_DIR into OUT_DIR (same file names)."""
    started = time.monotonic()
    if method == "cyclegan" and weights is None:
        raise click.UsageError("--method cyclegan requires --weights")
    store = spec = None
    if method == "cyclegan":
        try:
            store = load_weights(Path(weights).read_bytes())
            spec = store.spec
            if arch is not None and spec.arch != arch:
                raise ValidationError(
                    f"weights hold a {spec.arch!r} generator, --arch asked for {arch!r}"
                )
        except LldetError as exc:
            _raise_cli(exc)

    in_root = Path(in_dir)
    out_root = Path(out_dir)
    out_root.mkdir(parents=True, exist_ok=True)
    hist_root = None
    if hist_dir is not None:
        hist_root = Path(hist_dir)
        hist_root.mkdir(parents=True, exist_ok=True)

    files = sorted(in_root.glob("*.ppm"))
    if not files:
        raise _ValidationFailure(f"no inputs: {in_root} holds no .ppm files")
    written = []
    failures = 0
    for file in files:
        try:
            img = read_ppm(file.read_bytes())
            result = enhance_he(img) if method == "he" else translate(store, spec, img)
        except LldetError as exc:
            click.echo(f"warning: skipping {file.name}: {exc}", err=True)
            failures += 1
            continue
        target = out_root / file.name
        target.write_bytes(write_ppm(result))
        written.append(target)
        if hist_root is not None:
            (hist_root / f"{file.stem}.before.csv").write_text(
                histogram_csv(histogram_report(img)), encoding="ascii"
            )
            (hist_root / f"{file.stem}.after.csv").write_text(
                histogram_csv(histogram_report(result)), encoding="ascii"
            )
    if not written:
        raise _ValidationFailure(f"all {failures} inputs failed to enhance")
    _write_manifest(
        out_root / "run-manifest.json",
        "enhance",
        {"method": method, "arch": arch, "weights": weights, "failures": failures},
        [in_dir],
        written,
        started=started,
    )
    click.echo(f"enhanced {len(written)} image(s) into {out_root}")


def parse_train_config(text: str) -> dict:
    """Parse the ``key = value`` training config format."""
    known_int = {"epochs", "batch_size", "pool_size", "seed", "image_size",
                 "steps", "disc_layers", "base", "n_blocks", "depth", "disc_base"}
    known_float = {"lr", "beta1", "beta2", "lambda_cyc", "lambda_idt"}
    known_str = {"arch"}
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfigError(f"line {lineno}: expected 'key = value'")
        key, _, value = (part.strip() for part in line.partition("="))
        try:
            if key in known_int:
                out[key] = int(value)
            elif key in known_float:
                out[key] = float(value)
            elif key in known_str:
                out[key] = value
            else:
                raise InvalidConfigError(f"unknown config key {key!r} (line {lineno})")
        except ValueError:
            raise InvalidConfigError(
                f"bad value for {key!r}: {value!r} (line {lineno})"
            ) from None
    return out


@cli.command("train")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--domain-a", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--domain-b", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--metrics", "metrics_path", type=click.Path(dir_okay=False), default=None,
              help="Metric CSV path (default: <out>.metrics.csv).")
def cmd_train(config_path, domain_a, domain_b, out_path, metrics_path):
    """Train the dark<->bright translation pair; writes the A->B generator."""
    started = time.monotonic()
    try:
        raw = parse_train_config(Path(config_path).read_text(encoding="utf-8"))
        arch = raw.pop("arch", "resnet9")
        arch_opts = {k: raw.pop(k) for k in ("base", "n_blocks", "depth", "disc_base") if k in raw}
        try:
            cfg = TrainConfig(**raw)
        except TypeError as exc:
            raise InvalidConfigError(str(exc)) from None
        imgs_a = _read_image_dir(Path(domain_a))
        imgs_b = _read_image_dir(Path(domain_b))
        result = run_training(cfg, imgs_a, imgs_b, arch, **arch_opts)
    except LldetError as exc:
        _raise_cli(exc)
    out_file = Path(out_path)
    out_file.parent.mkdir(parents=True, exist_ok=True)
    out_file.write_bytes(encode_weights(result.g_ab))
    metrics_file = Path(metrics_path) if metrics_path else Path(str(out_file) + ".metrics.csv")
    metrics_file.write_text(metrics_csv(result.metrics), encoding="ascii")
    _write_manifest(
        Path(str(out_file) + ".manifest.json"),
        "train",
        {"config_file": config_path, "arch": arch, **arch_opts,
         **{k: getattr(cfg, k) for k in ("epochs", "batch_size", "lr", "lambda_cyc", "lambda_idt", "pool_size", "image_size", "steps")}},
        [domain_a, domain_b],
        [out_file, metrics_file],
        seed=cfg.seed,
        started=started,
    )
    click.echo(f"trained {arch} for {len(result.metrics)} step(s); weights at {out_file}")


def _read_image_dir(root: Path):
    files = sorted(root.glob("*.ppm"))
    return [read_ppm(f.read_bytes()) for f in files]


@cli.command("eval")
@click.option("--gt-dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--detections", "det_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--protocol", type=click.Choice(["voc50", "coco"]), default="voc50", show_default=True)
@click.option("--out-json", type=click.Path(dir_okay=False), required=True)
@click.option("--pr-csv", type=click.Path(dir_okay=False), default=None)
def cmd_eval(gt_dir, det_path, protocol, out_json, pr_csv):
    """Score a detections dump against ground-truth annotations."""
    started = time.monotonic()
    table = default_class_table()
    try:
        index = load_annotation_dir(gt_dir, table)
        for image_id, line, name in index.skipped:
            click.echo(f"warning: {image_id}:{line}: unknown class {name!r} skipped", err=True)
        parsed = parse_detections(Path(det_path).read_text(encoding="utf-8"), table)
        for rec, name in parsed.skipped:
            click.echo(f"warning: detection record {rec}: unknown class {name!r} skipped", err=True)
        unknown_ids = sorted(
            {d.image_id for d in parsed.detections} - set(index.images)
        )
        if unknown_ids:
            raise ValidationError(
                f"detections reference unknown image ids: {', '.join(unknown_ids)}"
            )
        report = evaluate(parsed.detections, index.ground_truths, EvalConfig.preset(protocol))
    except LldetError as exc:
        _raise_cli(exc)
    names = {i: table.name_of(i) for i in range(len(table))}
    out_file = Path(out_json)
    out_file.parent.mkdir(parents=True, exist_ok=True)
    out_file.write_text(report.to_json(names), encoding="ascii")
    outputs = [out_file]
    if pr_csv:
        Path(pr_csv).write_text(report.pr_csv(names), encoding="ascii")
        outputs.append(Path(pr_csv))

    click.echo(f"protocol: {protocol}")
    click.echo("class                 n_gt        AP")
    for cid, res in sorted(report.classes.items()):
        mean_ap = sum(t.ap for t in res.by_threshold.values()) / len(res.by_threshold)
        click.echo(f"{names.get(cid, cid):<20} {res.n_gt:>5} {mean_ap:>9.4f}")
    if report.undefined_ap_classes:
        click.echo(
            f"undefined AP (detections without ground truth): "
            f"{len(report.undefined_ap_classes)} class(es)"
        )
    click.echo(f"mAP: {report.map:.6f}")
    _write_manifest(
        Path(str(out_file) + ".manifest.json"),
        "eval",
        {"protocol": protocol},
        [gt_dir, det_path],
        outputs,
        started=started,
    )


@cli.command("report-hist")
@click.argument("image", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="CSV target (default: stdout).")
def cmd_report_hist(image, out_path):
    """Emit the luma histogram of a PPM image as bin,count CSV."""
    started = time.monotonic()
    try:
        img = read_ppm(Path(image).read_bytes())
    except LldetError as exc:
        _raise_cli(exc)
    csv_text = histogram_csv(histogram_report(img))
    if out_path is None:
        click.echo(csv_text, nl=False)
        return
    Path(out_path).write_text(csv_text, encoding="ascii")
    _write_manifest(
        Path(str(out_path) + ".manifest.json"),
        "report-hist",
        {},
        [image],
        [out_path],
        started=started,
    )


def main():
    try:
        cli(standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        sys.exit(exc.exit_code)
    except click.exceptions.Abort:
        sys.exit(130)


if __name__ == "__main__":
    main()
