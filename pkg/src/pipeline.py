#!/usr/bin/env python3
"""
lumedepth command line
======================

Orchestrates the inverse-rendering workflow:

1. gen      ray-cast a synthetic scene into a ground-truth bundle
2. render   re-render a bundle with its stored light
3. recover  recover depth, albedo and normals from one image
4. eval     score a prediction bundle against a ground-truth bundle
5. calib    fit the spotlight position and spread to known targets

Human-readable progress goes to stdout, structured errors to stderr as one
JSON line. Exit codes: 0 success, 1 domain/numeric/IO errors, 2 usage errors.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from src.bundle import (
    META_FILE,
    read_bundle,
    read_json,
    read_ppm,
    write_bundle,
    write_json,
    write_ply,
    write_ppm,
)
from src.config import Config, get_config, set_config
from src.evaluation import MetricsReport, evaluate
from src.geometry import CameraModel, build_ray_field
from src.photometry import LightModel, render_image
from src.recovery import (
    CalibObservation,
    RecoveryConfig,
    RecoveryResult,
    calibrate_light,
    recover,
)
from src.synth import cast, load_scene
from src.utils import LoggerMixin, ProgressTracker, get_log_file_path, setup_logger
from src.utils.errors import LumeDepthError, ShapeError

HISTORY_FILE = "history.csv"
PLY_FILE = "points.ply"


class LumeDepthPipeline(LoggerMixin):
    """Runs one CLI command per call"""

    # stable name under the "src" logger even when run as __main__
    _logger = logging.getLogger("src.pipeline")

    def __init__(self, config: Optional[Config] = None, progress_tracker: Optional[ProgressTracker] = None):
        self.config = config or get_config()
        self.progress_tracker = progress_tracker

    def _stage(self, job: str, stage: str, message: Optional[str] = None):
        if self.progress_tracker:
            self.progress_tracker.update_stage(job, stage, message)

    def gen(self, scene_path: Path, out_dir: Path):
        """Ray-cast a scene JSON into a bundle directory"""
        self.logger.info(f"🎬 Generating scene: {scene_path}")
        self._stage("gen", "loading")
        scene = load_scene(scene_path)
        self.logger.info(f"📐 {scene.kind} scene, {scene.camera.width}x{scene.camera.height}, seed {scene.seed}")

        bundle = cast(scene)
        self._stage("gen", "writing")
        manifest = write_bundle(
            out_dir, bundle.image, bundle.depth, bundle.normals, bundle.albedo,
            scene.camera, scene.light, seed=scene.seed, spec_hash=scene.spec_hash(),
        )
        self._stage("gen", "completed")
        self.logger.info(f"✅ Bundle written to {out_dir}")
        return manifest

    def render(self, bundle_dir: Path, out_path: Path) -> Path:
        """Render a bundle's fields with its own light"""
        self.logger.info(f"🖌️  Rendering bundle: {bundle_dir}")
        self._stage("render", "loading")
        bundle = read_bundle(bundle_dir)
        rays = build_ray_field(bundle.camera)
        image = render_image(bundle.light, rays, bundle.depth, bundle.albedo, bundle.normals)
        self._stage("render", "writing")
        write_ppm(out_path, image)
        self._stage("render", "completed")
        self.logger.info(f"✅ Image written to {out_path}")
        return Path(out_path)

    def recover(self, image_path: Path, camera_path: Path, light_path: Path,
                config_path: Optional[Path], out_dir: Path, ply: bool = False) -> RecoveryResult:
        """Recover depth/albedo/normals and write them as a bundle"""
        self.logger.info(f"🔍 Recovering from image: {image_path}")
        self._stage("recover", "loading")
        observed = read_ppm(image_path)
        camera = CameraModel.from_dict(read_json(camera_path))
        light = LightModel.from_dict(read_json(light_path), self.config.render)
        recovery_config = RecoveryConfig.from_dict(read_json(config_path)) if config_path else RecoveryConfig()
        if observed.shape[:2] != camera.shape:
            raise ShapeError(
                f"image has shape {observed.shape[:2]} but the camera is {camera.shape}",
                shapes={"image": list(observed.shape[:2]), "camera": list(camera.shape)},
            )

        self._stage("recover", "optimizing", f"{recovery_config.steps + recovery_config.polish_steps} steps")

        def on_step(step: int, total: int):
            if self.progress_tracker:
                self.progress_tracker.update_optimization_progress("recover", step, total)

        result = recover(observed, light, camera, recovery_config, on_step=on_step)

        self._stage("recover", "writing")
        out_dir = Path(out_dir)
        write_bundle(out_dir, result.rendered, result.depth, result.normals, result.albedo,
                     camera, light, seed=recovery_config.seed)
        result.history.write_csv(out_dir / HISTORY_FILE)
        if ply:
            write_ply(out_dir / PLY_FILE, result.depth, build_ray_field(camera), result.rendered)
        self._stage("recover", "completed")

        summary = result.history.get_summary()
        self.logger.info(f"📊 Total loss {summary['initial_total']:.6e} -> {result.final.total:.6e}")
        self.logger.info(f"✅ Prediction written to {out_dir}")
        return result

    def evaluate(self, pred_dir: Path, gt_dir: Path, out_path: Path) -> MetricsReport:
        """Score a prediction bundle; writes JSON and a .txt table next to it"""
        self.logger.info(f"📏 Evaluating {pred_dir} against {gt_dir}")
        self._stage("eval", "loading")
        pred = read_bundle(pred_dir)
        gt = read_bundle(gt_dir)
        rays = build_ray_field(gt.camera)
        report = evaluate(pred.depth, gt.depth, pred.normals, gt.normals, pred.image, gt.image, rays=rays)

        self._stage("eval", "writing")
        out_path = Path(out_path)
        write_json(out_path, report.to_dict())
        table = report.to_table()
        out_path.with_suffix(".txt").write_text(table, encoding="utf-8")
        self._stage("eval", "completed")
        self.logger.info(table.rstrip())
        self.logger.info(f"✅ Report written to {out_path}")
        return report

    def _observation_dirs(self, obs_dir: Path) -> List[Path]:
        obs_dir = Path(obs_dir)
        if not obs_dir.exists():
            raise FileNotFoundError(str(obs_dir))
        if (obs_dir / META_FILE).exists():
            return [obs_dir]
        return sorted(p for p in obs_dir.iterdir() if (p / META_FILE).exists())

    def calibrate(self, obs_dir: Path, init_path: Path, out_path: Path):
        """Fit the light to a directory of observation bundles"""
        self.logger.info(f"🔦 Calibrating from observations in {obs_dir}")
        self._stage("calib", "loading")
        directories = self._observation_dirs(obs_dir)
        if not directories:
            raise FileNotFoundError(str(Path(obs_dir) / "*" / META_FILE))
        bundles = [read_bundle(d) for d in directories]
        camera = bundles[0].camera
        observations = [
            CalibObservation(image=b.image, depth=b.depth, normals=b.normals, albedo=b.albedo)
            for b in bundles
        ]
        init = LightModel.from_dict(read_json(init_path), self.config.render)

        self._stage("calib", "optimizing")
        light, report = calibrate_light(observations, camera, init,
                                        max_workers=self.config.processing.max_workers)

        self._stage("calib", "writing")
        out_path = Path(out_path)
        write_json(out_path, light.to_dict())
        write_json(out_path.with_name(out_path.stem + "_report.json"), report.to_dict())
        self._stage("calib", "completed")
        self.logger.info(f"✅ Light written to {out_path}")
        return light, report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lumedepth",
        description="Depth and albedo from a single spotlight-lit image",
    )
    parser.add_argument("--quiet", action="store_true", help="Only print warnings and errors")
    parser.add_argument("--threads", type=int, help="Worker cap (default: $LUMEDEPTH_THREADS or core count)")
    parser.add_argument("--progress-file", type=str, help="Path to progress tracking JSON file")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", help="Ray-cast a synthetic scene")
    gen.add_argument("scene", type=Path, help="Scene JSON")
    gen.add_argument("-o", "--output", type=Path, required=True, help="Output bundle directory")

    render = commands.add_parser("render", help="Render a bundle with its stored light")
    render.add_argument("bundle", type=Path, help="Bundle directory")
    render.add_argument("-o", "--output", type=Path, required=True, help="Output PPM")

    rec = commands.add_parser("recover", help="Recover depth and albedo from one image")
    rec.add_argument("image", type=Path, help="Input PPM")
    rec.add_argument("--camera", type=Path, required=True, help="Camera JSON")
    rec.add_argument("--light", type=Path, required=True, help="Light JSON")
    rec.add_argument("--config", type=Path, help="Recovery config JSON")
    rec.add_argument("--ply", action="store_true", help=f"Also write {PLY_FILE}")
    rec.add_argument("-o", "--output", type=Path, required=True, help="Output bundle directory")

    ev = commands.add_parser("eval", help="Score a prediction against ground truth")
    ev.add_argument("pred", type=Path, help="Prediction bundle directory")
    ev.add_argument("gt", type=Path, help="Ground-truth bundle directory")
    ev.add_argument("-o", "--output", type=Path, required=True, help="Report JSON")

    calib = commands.add_parser("calib", help="Fit the spotlight to known targets")
    calib.add_argument("observations", type=Path, help="Directory of observation bundles")
    calib.add_argument("--init", type=Path, required=True, help="Initial light JSON")
    calib.add_argument("-o", "--output", type=Path, required=True, help="Fitted light JSON")
    return parser


def _report_error(data: dict) -> int:
    print(json.dumps(data, sort_keys=True), file=sys.stderr)
    return 1


def main(argv: Optional[List[str]] = None) -> int:
    """Main function to run the command line"""
    args = build_parser().parse_args(argv)

    try:
        config = Config.from_project_root().with_threads(args.threads)
        config.validate()
    except ValueError as e:
        return _report_error({"error": "ConfigError", "message": str(e)})
    config.processing.quiet = args.quiet
    set_config(config)

    setup_logger(
        "src",
        log_file=get_log_file_path(config.paths.project_root, args.command),
        console_level=logging.WARNING if config.processing.quiet else logging.INFO,
    )

    progress_tracker = ProgressTracker(Path(args.progress_file)) if args.progress_file else None
    pipeline = LumeDepthPipeline(config, progress_tracker)

    try:
        if args.command == "gen":
            pipeline.gen(args.scene, args.output)
        elif args.command == "render":
            pipeline.render(args.bundle, args.output)
        elif args.command == "recover":
            pipeline.recover(args.image, args.camera, args.light, args.config, args.output, ply=args.ply)
        elif args.command == "eval":
            pipeline.evaluate(args.pred, args.gt, args.output)
        elif args.command == "calib":
            pipeline.calibrate(args.observations, args.init, args.output)
    except LumeDepthError as e:
        if progress_tracker:
            progress_tracker.update_stage(args.command, "failed", error=e.message)
        return _report_error(e.to_dict())
    except FileNotFoundError as e:
        path = e.filename if e.filename else str(e)
        if progress_tracker:
            progress_tracker.update_stage(args.command, "failed", error=f"missing {path}")
        return _report_error({"error": "FileNotFoundError", "message": f"file not found: {path}", "path": str(path)})
    return 0


if __name__ == "__main__":
    sys.exit(main())
