"""Command-line front end: ``hrmap <subcommand> [options]``.

Option values come from, in order of precedence, command-line flags, a JSON
object passed with ``--config`` (keys are option names, ``-`` or ``_``), and
the built-in defaults shown by ``--help``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .alignment import MappingTable, build_mapping
from .core import FeatureSequence, Source, Trajectory, resample_indices
from .distance import ActionDistanceWeights, ActionMetric, VisualMetric
from .errors import HrmapError, InvalidInput, NoConvergence
from .formats import dumps_trajectory, read_features, read_trajectory, write_features, write_trajectory
from .geometry import PinholeCamera, RigidTransform, fit_rigid, quat_from_axis_angle, reprojection_rmse, solve_pnp
from .metrics import SparcConfig, action_distance, intra_action_distance, sparc, speed_profile
from .mixup import BatchEmitter, BetaDist, Demo, LinearAnneal, alpha_at, export_dataset
from .retarget import KinematicChain, RetargetConfig, _fk, retarget_trajectory
from .retrieval import GmsConfig, eval_retrieval, gms_sdtw, read_segments, read_truth, segments_to_jsonl
from . import synth

SYNTH_KINDS = ("minjerk", "planted", "rigid", "features", "demos", "pnp", "retarget")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


class _Formatter(argparse.ArgumentDefaultsHelpFormatter):
    pass


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _nonneg_float(text):
    v = float(text)
    if not (v >= 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a non-negative number, got {text}")
    return v


# ---------------------------------------------------------------------------
# I/O helpers


def _emit(text: str, out) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(out).write_text(text, encoding="utf-8")


def _csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf).writerows(rows)
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True) + "\n"


def _read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}: invalid JSON: {exc}") from exc


def _resample_features(fs: FeatureSequence, gamma: float) -> FeatureSequence:
    return FeatureSequence(fs.rows[resample_indices(len(fs), gamma)], fs.demo_id)


def _load_demos(directory, features=False, wrist=False, gamma=1.0) -> list[Demo]:
    """Trajectories ``<id>.json`` with optional ``<id>.trjf`` / ``<id>.wrist.trjf`` features."""
    d = Path(directory)
    if not d.is_dir():
        raise FileNotFoundError(f"{d}: not a directory")
    files = sorted(p for p in d.glob("*.json") if p.is_file())
    if not files:
        raise InvalidInput(f"{d}: no trajectory files (*.json)")
    demos = []
    for f in files:
        traj = read_trajectory(f)
        demo_id = traj.demo_id or f.stem
        if traj.demo_id != demo_id:
            traj = Trajectory(traj.translations, traj.quaternions, traj.joints, traj.dt, traj.source, demo_id)
        agent = read_features(f.with_suffix(".trjf"), demo_id) if features else None
        wr = read_features(f.with_name(f.stem + ".wrist.trjf"), demo_id) if wrist else None
        if gamma != 1.0:
            idx = resample_indices(len(traj), gamma)
            traj = traj.take(idx, dt=traj.dt * gamma)
            agent = _resample_features(agent, gamma) if agent is not None else None
            wr = _resample_features(wr, gamma) if wr is not None else None
        if agent is None:
            demos.append(traj)
        else:
            demos.append(Demo(traj, agent, wr))
    return demos


def _weights(args) -> ActionDistanceWeights:
    return ActionDistanceWeights(args.lambda1, args.lambda2)


def _schedule(args):
    if args.schedule == "linear":
        return LinearAnneal(args.epochs_to_zero, args.alpha_min)
    return BetaDist(args.beta_a, args.beta_b)


# ---------------------------------------------------------------------------
# subcommands


def cmd_align(args):
    visual = args.metric == "visual"
    humans = _load_demos(args.humans, features=visual)
    robots = _load_demos(args.robots, features=visual, gamma=args.gamma)
    if visual:
        humans = [h.agent for h in humans]
        robots = [r.agent for r in robots]
        metric = VisualMetric()
    else:
        metric = ActionMetric(_weights(args))
    table = build_mapping(humans, robots, metric, top_k=args.top_k, threads=args.threads, band=args.band)
    _emit(table.to_jsonl(), args.out)


def _features_for(traj_path, explicit):
    path = Path(explicit) if explicit else Path(traj_path).with_suffix(".trjf")
    return read_features(path)


def cmd_retrieve(args):
    cfg = GmsConfig(args.l_min, args.l_max, args.epsilon)
    if args.metric == "visual":
        human = _features_for(args.human, args.human_features)
        robot = _features_for(args.robot, args.robot_features)
        segs = gms_sdtw(human, robot, VisualMetric(), cfg)
    else:
        segs = gms_sdtw(read_trajectory(args.human), read_trajectory(args.robot), ActionMetric(_weights(args)), cfg)
    _emit(segments_to_jsonl(segs), args.out)


def cmd_retrieve_eval(args):
    miou, acc = eval_retrieval(read_segments(args.segments), read_truth(args.truth))
    _emit(_csv([["miou", "acc_at_0.5"], [repr(miou), repr(acc)]]), args.out)


def cmd_mixup(args):
    schedule = _schedule(args)
    rows = [["epoch", "alpha"]]
    for e in range(args.epochs):
        rows.append([e, repr(alpha_at(schedule, e, np.random.default_rng([args.seed, e])))])
    _emit(_csv(rows), args.out)


def cmd_batch(args):
    humans = _load_demos(args.humans, features=True)
    robots = _load_demos(args.robots, features=True, wrist=True, gamma=args.gamma)
    mapping = MappingTable.read(args.mapping) if args.mapping else None
    emitter = BatchEmitter(humans, robots, mapping, _schedule(args), batch_size=args.batch_size, seed=args.seed,
                           tau=args.tau, k=args.k, batches_per_epoch=args.batches_per_epoch,
                           mapping_mode=args.mapping_mode)
    manifest = export_dataset(emitter, args.out, args.epochs)
    _emit(_json(manifest), None)


def cmd_retarget(args):
    chain = KinematicChain.read(args.chain)
    kps, base_t, base_q = [], [], []
    for n, line in enumerate(Path(args.keypoints).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            kps.append(rec["keypoints"])
            if "wrist_translation" in rec:
                base_t.append(rec["wrist_translation"])
                base_q.append(rec["wrist_quaternion"])
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise InvalidInput(f"{args.keypoints}:{n}: bad keypoint record: {exc}") from exc
    if not kps:
        raise InvalidInput(f"{args.keypoints}: no keypoint frames")
    if base_t and len(base_t) != len(kps):
        raise InvalidInput("wrist pose given for some frames but not all")
    cfg = RetargetConfig(scale=args.scale, smooth=args.smooth, max_iters=args.max_iters)
    traj = retarget_trajectory(
        chain, np.asarray(kps, dtype=float), cfg, mode=args.mode, smoothing=args.smoothing, dt=args.dt,
        base_translations=np.asarray(base_t, float) if base_t else None,
        base_quaternions=np.asarray(base_q, float) if base_q else None,
        demo_id=args.demo_id, source=Source.ROBOT,
    )
    _emit(dumps_trajectory(traj), args.out)


def cmd_sparc(args):
    traj = read_trajectory(args.input)
    cfg = SparcConfig(args.pad_factor, args.omega_c_max, args.amp_threshold)
    value, omega_c = sparc(speed_profile(traj), traj.dt, cfg)
    _emit(_json({"sparc": value, "omega_c": omega_c}), args.out)


def cmd_ad(args):
    humans = _load_demos(args.humans)
    robots = _load_demos(args.robots, gamma=args.gamma)
    w = _weights(args)
    rows = [["statistic", "value"], ["cross", repr(action_distance(humans, robots, w, args.threads))]]
    if len(humans) > 1:
        rows.append(["intra_human", repr(intra_action_distance(humans, w, args.threads))])
    if len(robots) > 1:
        rows.append(["intra_robot", repr(intra_action_distance(robots, w, args.threads))])
    _emit(_csv(rows), args.out)


def cmd_calibrate(args):
    with open(args.input, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        need = ["cx", "cy", "cz", "rx", "ry", "rz"]
        if reader.fieldnames is None or any(c not in reader.fieldnames for c in need):
            raise InvalidInput(f"{args.input}: expected CSV columns {','.join(need)}")
        try:
            rows = np.array([[float(r[c]) for c in need] for r in reader], dtype=float).reshape(-1, 6)
        except ValueError as exc:
            raise InvalidInput(f"{args.input}: non-numeric value: {exc}") from exc
    transform, rmse = fit_rigid(rows[:, :3], rows[:, 3:], max_iters=args.max_iters)
    _emit(_json({**transform.to_dict(), "rmse": rmse}), args.out)


def cmd_pnp(args):
    prob = _read_json(args.input)
    try:
        cam = PinholeCamera(**prob["camera"])
        obj = np.asarray(prob["object_points"], dtype=float)
        img = np.asarray(prob["image_points"], dtype=float)
        init = prob.get("initial", {"quaternion": [1, 0, 0, 0], "translation": [0, 0, 1]})
        initial = RigidTransform(init["quaternion"], init["translation"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, HrmapError):
            raise
        raise InvalidInput(f"{args.input}: malformed PnP problem: {exc}") from exc
    try:
        pose = solve_pnp(obj, img, cam, initial, max_iters=args.max_iters)
    except NoConvergence as exc:
        raise InvalidInput(f"PnP did not converge in {args.max_iters} iterations") from exc
    _emit(_json({**pose.to_dict(), "rmse_px": reprojection_rmse(obj, img, cam, pose)}), args.out)


def _synth_planted(args, out):
    sig = args.noise
    params = synth.PlantedSegments(base_len=args.length or 600,
                                 segments=((60, sig), (260, sig), (450, sig)), seed=args.seed)
    data, truth = synth.generate(params)
    write_trajectory(data["human"], out / "human.json")
    write_trajectory(data["robot"], out / "robot.json")
    write_features(data["human_features"], out / "human.trjf")
    write_features(data["robot_features"], out / "robot.trjf")
    (out / "truth.json").write_text(_json([{"start": s, "end": e} for s, e in truth["spans"]]), encoding="utf-8")


def _synth_demos(args, out):
    data, _ = synth.generate(synth.DemoSet(args.n_humans, args.n_robots, length=args.length or 40,
                                           noise=args.noise or 0.005, seed=args.seed))
    for sub, demos in (("humans", data["humans"]), ("robots", data["robots"])):
        d = out / sub
        d.mkdir(parents=True, exist_ok=True)
        for demo in demos:
            write_trajectory(demo.trajectory, d / f"{demo.demo_id}.json")
            write_features(demo.agent, d / f"{demo.demo_id}.trjf")
            if demo.wrist is not None:
                write_features(demo.wrist, d / f"{demo.demo_id}.wrist.trjf")


def _synth_pnp(args, out):
    rng = np.random.default_rng(args.seed)
    cam = PinholeCamera(500.0, 500.0, 320.0, 240.0)
    truth = RigidTransform(quat_from_axis_angle(rng.normal(size=3), rng.uniform(0, 0.5)),
                           rng.uniform([-0.2, -0.2, 2.0], [0.2, 0.2, 3.0]))
    obj = rng.uniform(-0.5, 0.5, size=(args.n_points, 3))
    img = cam.project(truth.apply(obj))
    if args.noise > 0:
        img = img + rng.normal(0.0, args.noise, size=img.shape)
    init = RigidTransform(quat_from_axis_angle(rng.normal(size=3), 0.1), truth.translation + rng.normal(0, 0.05, 3))
    prob = {"camera": {"fx": cam.fx, "fy": cam.fy, "cx": cam.cx, "cy": cam.cy},
            "object_points": obj.tolist(), "image_points": img.tolist(), "initial": init.to_dict()}
    (out / "problem.json").write_text(_json(prob), encoding="utf-8")
    (out / "truth.json").write_text(_json(truth.to_dict()), encoding="utf-8")


def _synth_retarget(args, out):
    rng = np.random.default_rng(args.seed)
    chain = KinematicChain([[0, 0, 1], [0, 1, 0], [0, 1, 0]], [0.3, 0.25, 0.2], [-2.5] * 3, [2.5] * 3)
    T = args.length or 30
    u = np.linspace(0.0, 1.0, T)[:, None]
    q0, q1 = rng.uniform(-1, 1, size=(2, chain.n))
    qs = q0 + (q1 - q0) * synth.min_jerk_profile(u)
    (out / "chain.json").write_text(_json(chain.to_dict()), encoding="utf-8")
    lines = "".join(_json({"keypoints": _fk(chain, q)[0].tolist()}) for q in qs)
    (out / "keypoints.jsonl").write_text(lines, encoding="utf-8")
    (out / "truth.json").write_text(_json({"joints": qs.tolist()}), encoding="utf-8")


def cmd_synth(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.kind == "minjerk":
        rng = np.random.default_rng(args.seed)
        traj, truth = synth.generate(synth.MinJerk(np.zeros(3), rng.uniform(-0.5, 0.5, 3), T=args.length or 200,
                                                   seed=args.seed))
        write_trajectory(traj, out / "minjerk.json")
        (out / "truth.json").write_text(_json(truth), encoding="utf-8")
    elif args.kind == "planted":
        _synth_planted(args, out)
    elif args.kind == "rigid":
        data, truth = synth.generate(synth.RigidScene(args.n_points, noise_sigma=args.noise, seed=args.seed))
        rows = [["cx", "cy", "cz", "rx", "ry", "rz"]]
        rows += [[repr(float(v)) for v in np.concatenate([c, r])] for c, r in zip(data["cam_points"], data["rob_points"])]
        (out / "points.csv").write_text(_csv(rows), encoding="utf-8")
        (out / "truth.json").write_text(_json(truth["transform"].to_dict()), encoding="utf-8")
    elif args.kind == "features":
        fs, truth = synth.generate(synth.FeatureBlob(T=args.length or 100, seed=args.seed))
        write_features(fs, out / "features.trjf")
        (out / "truth.json").write_text(_json({"labels": truth["labels"]}), encoding="utf-8")
    elif args.kind == "demos":
        _synth_demos(args, out)
    elif args.kind == "pnp":
        _synth_pnp(args, out)
    else:
        _synth_retarget(args, out)


# ---------------------------------------------------------------------------
# parser


def _global_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--config", default=None, help="JSON file of option defaults; flags override it")
    g.add_argument("--seed", type=int, default=0, help="seed for every random draw")
    g.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1,
                   help="worker threads; results do not depend on it")
    return p


def _add_weights(p):
    p.add_argument("--lambda1", type=_nonneg_float, default=1.0, help="weight of the joint-angle L1 term")
    p.add_argument("--lambda2", type=_nonneg_float, default=0.5, help="weight of the rotation-distance term")


def _add_schedule(p):
    p.add_argument("--schedule", choices=["linear", "beta"], default="linear", help="interpolation weight schedule")
    p.add_argument("--epochs-to-zero", type=_positive_int, default=300, help="linear: epochs until alpha reaches its floor")
    p.add_argument("--alpha-min", type=float, default=0.0, help="linear: alpha floor")
    p.add_argument("--beta-a", type=float, default=1.0, help="beta: first shape parameter")
    p.add_argument("--beta-b", type=float, default=1.0, help="beta: second shape parameter")


def build_parser() -> argparse.ArgumentParser:
    common = _global_options()
    parser = _Parser(prog="hrmap", description=__doc__.splitlines()[0], formatter_class=_Formatter)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text, parents=[common], formatter_class=_Formatter)
        p.set_defaults(func=func)
        return p

    p = add("align", cmd_align, "DTW-align every human demo with every robot demo into a mapping table")
    p.add_argument("--humans", required=True, help="directory of human trajectory JSON files")
    p.add_argument("--robots", required=True, help="directory of robot trajectory JSON files")
    p.add_argument("--metric", choices=["action", "visual"], default="action", help="frame distance")
    _add_weights(p)
    p.add_argument("--gamma", type=float, default=1.0, help="resample robot demos at this spacing first")
    p.add_argument("--top-k", type=_positive_int, default=None, help="keep only the k cheapest robot demos per human demo")
    p.add_argument("--band", type=int, default=None, help="Sakoe-Chiba band half-width")
    p.add_argument("--out", default="-", help="output JSONL path ('-' for stdout)")

    p = add("retrieve", cmd_retrieve, "find segments of a long human sequence that match a robot query")
    p.add_argument("--human", required=True, help="human trajectory JSON")
    p.add_argument("--robot", required=True, help="robot query trajectory JSON")
    p.add_argument("--metric", choices=["action", "visual"], default="action", help="frame distance")
    p.add_argument("--human-features", default=None, help="human TRJF features (default: <human>.trjf)")
    p.add_argument("--robot-features", default=None, help="robot TRJF features (default: <robot>.trjf)")
    _add_weights(p)
    p.add_argument("--l-min", type=_positive_int, default=32, help="shortest window length")
    p.add_argument("--l-max", type=_positive_int, default=48, help="longest window length")
    p.add_argument("--epsilon", type=_nonneg_float, default=0.06, help="acceptance threshold on the normalized cost")
    p.add_argument("--out", default="-", help="output JSONL path ('-' for stdout)")

    p = add("retrieve-eval", cmd_retrieve_eval, "score retrieved segments against ground truth (CSV)")
    p.add_argument("--segments", required=True, help="segment JSONL from 'retrieve'")
    p.add_argument("--truth", required=True, help="JSON array of {start, end}")
    p.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")

    p = add("mixup", cmd_mixup, "tabulate the interpolation weight schedule per epoch (CSV)")
    _add_schedule(p)
    p.add_argument("--epochs", type=int, default=300, help="number of epochs to tabulate")
    p.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")

    p = add("batch", cmd_batch, "emit co-training batches to a TRJB file with a JSON manifest")
    p.add_argument("--humans", required=True, help="human demo directory (<id>.json + <id>.trjf)")
    p.add_argument("--robots", required=True, help="robot demo directory (<id>.json, <id>.trjf, <id>.wrist.trjf)")
    p.add_argument("--mapping", default=None, help="mapping table JSONL from 'align'")
    p.add_argument("--mapping-mode", choices=["table", "random"], default="table", help="how robot steps are paired")
    p.add_argument("--gamma", type=float, default=1.0, help="resample robot demos at this spacing first")
    p.add_argument("--batch-size", type=_positive_int, default=128, help="samples per batch (even)")
    p.add_argument("--batches-per-epoch", type=_positive_int, default=None, help="default: one pass over the data")
    p.add_argument("--epochs", type=int, default=1, help="epochs to write")
    p.add_argument("--tau", type=_positive_int, default=2, help="observation history length")
    p.add_argument("--k", type=_positive_int, default=32, help="action chunk length")
    _add_schedule(p)
    p.add_argument("--out", required=True, help="output TRJB path")

    p = add("retarget", cmd_retarget, "retarget keypoint sequences onto a kinematic chain")
    p.add_argument("--chain", required=True, help="chain description JSON")
    p.add_argument("--keypoints", required=True, help="JSONL, one {\"keypoints\": [[x,y,z],...]} per frame")
    p.add_argument("--mode", choices=["position", "vector"], default="position", help="objective")
    p.add_argument("--scale", type=float, default=1.0, help="human-to-robot size ratio")
    p.add_argument("--smooth", type=_nonneg_float, default=0.0, help="weight of the joint-change penalty")
    p.add_argument("--smoothing", type=float, default=0.2, help="keypoint low-pass factor (1 disables)")
    p.add_argument("--max-iters", type=_positive_int, default=200, help="solver iterations per frame")
    p.add_argument("--dt", type=float, default=1.0 / 30.0, help="frame period of the output trajectory")
    p.add_argument("--demo-id", default="", help="demo id of the output trajectory")
    p.add_argument("--out", default="-", help="output trajectory JSON path ('-' for stdout)")

    p = add("sparc", cmd_sparc, "spectral arc length of a trajectory's speed profile (JSON)")
    p.add_argument("--input", required=True, help="trajectory JSON")
    p.add_argument("--pad-factor", type=_positive_int, default=4, help="zero-padding multiple")
    p.add_argument("--omega-c-max", type=float, default=15.0, help="cutoff frequency cap in Hz")
    p.add_argument("--amp-threshold", type=float, default=0.05, help="adaptive cutoff amplitude")
    p.add_argument("--out", default="-", help="output JSON path ('-' for stdout)")

    p = add("ad", cmd_ad, "action distance between and within two demo sets (CSV)")
    p.add_argument("--humans", required=True, help="directory of human trajectory JSON files")
    p.add_argument("--robots", required=True, help="directory of robot trajectory JSON files")
    p.add_argument("--gamma", type=float, default=1.0, help="resample robot demos at this spacing first")
    _add_weights(p)
    p.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")

    p = add("calibrate", cmd_calibrate, "fit the camera-to-robot rigid transform from point pairs (JSON)")
    p.add_argument("--input", required=True, help="CSV with columns cx,cy,cz,rx,ry,rz")
    p.add_argument("--max-iters", type=_positive_int, default=200, help="solver iterations")
    p.add_argument("--out", default="-", help="output JSON path ('-' for stdout)")

    p = add("pnp", cmd_pnp, "refine an object pose from 2D-3D correspondences (JSON)")
    p.add_argument("--input", required=True, help="problem JSON: camera, object_points, image_points, initial")
    p.add_argument("--max-iters", type=_positive_int, default=100, help="Gauss-Newton iterations")
    p.add_argument("--out", default="-", help="output JSON path ('-' for stdout)")

    p = add("synth", cmd_synth, "write a synthetic instance with ground truth")
    p.add_argument("--kind", choices=SYNTH_KINDS, required=True, help="instance type")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--length", type=_positive_int, default=None, help="sequence length (default depends on kind)")
    p.add_argument("--noise", type=_nonneg_float, default=0.0, help="noise level")
    p.add_argument("--n-points", type=_positive_int, default=20, help="rigid/pnp: number of points")
    p.add_argument("--n-humans", type=_positive_int, default=3, help="demos: human demo count")
    p.add_argument("--n-robots", type=_positive_int, default=2, help="demos: robot demo count")
    return parser


def _apply_config(parser, path) -> None:
    cfg = _read_json(path)
    if not isinstance(cfg, dict):
        raise InvalidInput(f"{path}: config must be a JSON object")
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction)).choices
    known = set()
    for sp in subparsers.values():
        dests = {a.dest for a in sp._actions}
        known |= dests
        vals = {}
        for key, val in cfg.items():
            dest = key.replace("-", "_")
            if dest in dests and dest not in ("config", "help"):
                # strings go through the option's type converter, like a flag would
                vals[dest] = val if val is None else str(val)
        sp.set_defaults(**vals)
    unknown = sorted(k for k in cfg if k.replace("-", "_") not in known)
    if unknown:
        raise InvalidInput(f"{path}: unknown config keys {', '.join(unknown)}")


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser = build_parser()
        pre = argparse.ArgumentParser(add_help=False)
        pre.add_argument("--config", default=None)
        known, _ = pre.parse_known_args(argv)
        if known.config:
            _apply_config(parser, known.config)
        args = parser.parse_args(argv)
        args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else 0
    except OSError as exc:
        print(f"hrmap: I/O error: {exc}", file=sys.stderr)
        return 2
    except (HrmapError, ValueError) as exc:
        print(f"hrmap: error: {' '.join(str(exc).split())}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
