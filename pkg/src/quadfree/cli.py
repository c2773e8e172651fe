"""Command-line surface: instance I/O, canonicalization/cut/verify
commands, figure-data emission, and a demo cutting loop.

Exit codes: 2 not separable, 3 parse error, 4 all rays recede,
5 infeasible constraint, 6 unbounded LP, 7 degenerate vertex.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import cuts, freesets, lp, oracle, spectral
from .corefns import CaseData
from .errors import (
    AllRaysRecessionError,
    DegenerateVertexError,
    EmptySError,
    NotSeparableError,
    ParseError,
    QuadfreeError,
    UnboundedLPError,
)

_TOP_KEYS = {"dim", "Q", "b", "c", "point", "cone", "objective", "linear_constraints"}
_REQUIRED = {"dim", "Q", "b", "c", "point"}
_SENSES = {"<=", "=", ">="}


def parse_instance(path: str) -> dict:
    """Strictly parse an instance file; unknown keys are rejected."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read instance: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError("instance must be a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ParseError(f"unknown keys: {sorted(unknown)}")
    missing = _REQUIRED - set(raw)
    if missing:
        raise ParseError(f"missing keys: {sorted(missing)}")

    try:
        p = int(raw["dim"])
        Q = np.array(raw["Q"], dtype=float)
        b = np.array(raw["b"], dtype=float)
        c = float(raw["c"])
        point = np.array(raw["point"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"malformed numeric field: {exc}") from exc
    if Q.shape != (p, p) or b.shape != (p,) or point.shape != (p,):
        raise ParseError("Q/b/point shapes do not match dim")
    if np.max(np.abs(Q - Q.T), initial=0.0) > 1e-12 * (1.0 + np.max(np.abs(Q), initial=0.0)):
        raise ParseError("Q is not symmetric within tolerance")

    inst = {"raw": raw, "dim": p, "Q": 0.5 * (Q + Q.T), "b": b, "c": c, "point": point}

    if "cone" in raw:
        cone = raw["cone"]
        if not isinstance(cone, dict) or set(cone) != {"rays"}:
            raise ParseError('cone must be {"rays": [...]}')
        try:
            rays = np.array(cone["rays"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"malformed rays: {exc}") from exc
        if rays.shape != (p, p):
            raise ParseError("cone needs exactly p rays of dimension p")
        inst["rays"] = rays.T  # ray list rows → ray columns

    if "objective" in raw:
        obj = np.array(raw["objective"], dtype=float)
        if obj.shape != (p,):
            raise ParseError("objective dimension mismatch")
        inst["objective"] = obj

    if "linear_constraints" in raw:
        rows = raw["linear_constraints"]
        if not isinstance(rows, list):
            raise ParseError("linear_constraints must be a list")
        parsed = []
        for row in rows:
            if not isinstance(row, dict) or set(row) != {"coef", "rhs", "sense"}:
                raise ParseError("each constraint needs exactly coef/rhs/sense")
            if row["sense"] not in _SENSES:
                raise ParseError(f"bad sense {row['sense']!r}")
            coef = np.array(row["coef"], dtype=float)
            if coef.shape != (p,):
                raise ParseError("constraint coef dimension mismatch")
            parsed.append((coef, float(row["rhs"]), row["sense"]))
        inst["linear_constraints"] = parsed
    return inst


def emit_json(obj) -> str:
    """Canonical serialization: sorted keys, 2-space indent, newline.

    Floats use Python's shortest round-trip representation, which is
    bit-faithful (up to 17 significant digits when needed).
    """
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def _to_qc(inst) -> spectral.QuadraticConstraint:
    return spectral.QuadraticConstraint(
        Q=inst["Q"], b=inst["b"], c=inst["c"], point=inst["point"]
    )


def _cf_payload(cf: spectral.CanonicalForm) -> dict:
    return {
        "n": cf.n,
        "m": cf.m,
        "l": cf.l,
        "a": cf.a,
        "d": cf.d,
        "h": cf.h,
        "lambda": cf.lam,
        "case": cf.case,
        "M": cf.M,
        "mapped_point": cf.mapped_point,
        "scale": {
            "eigenvalues": cf.scale["eigenvalues"],
            "signature": list(cf.scale["signature"]),
            "quad_scale": cf.scale["quad_scale"],
            "case2_rescale": cf.scale.get("case2_rescale"),
        },
    }


def cmd_canon(inst, args) -> int:
    cf = spectral.canonicalize(_to_qc(inst), zero_tol=args.tol)
    sys.stdout.write(emit_json(_cf_payload(cf)))
    return 0


def cmd_cut(inst, args) -> int:
    if "rays" not in inst:
        raise ParseError("cut command needs a cone in the instance")
    cone = cuts.SimplicialCone(apex=inst["point"], R=inst["rays"])
    cert = cuts.separate(_to_qc(inst), cone, zero_tol=args.tol)
    payload = {
        "case": cert.canonical_form.case,
        "steps": [
            {"value": st.value, "residual": st.residual} for st in cert.steps
        ],
        "weights": cert.weights,
        "coef": cert.coef,
        "rhs": cert.rhs,
        "apex_violation": cert.apex_violation,
    }
    sys.stdout.write(emit_json(payload))
    return 0


def _case2_reports(cf, fs, samples, seed):
    cd = CaseData(cf.lam, cf.a, cf.d, unit_a=True)
    rng = np.random.default_rng(seed + 1)
    reports = []
    for _ in range(50):
        y = rng.standard_normal(cf.m)
        if np.linalg.norm(y) < 1e-9:
            continue
        reports.append(oracle.check_duality(cd, y))
        try:
            reports.append(oracle.check_gradient(cd, y))
        except QuadfreeError:
            pass
    pairs = [
        (rng.standard_normal(cf.m), rng.standard_normal(cf.m)) for _ in range(100)
    ]
    reports.append(oracle.check_convexity(cd, pairs))

    strict, loose = [], []
    for beta in oracle._unit_rows(rng, 200, cf.m):
        val = float(cd.a @ cd.lam + cd.d @ beta)
        if val < -1e-6 and len(strict) < 25:
            strict.append(beta)
        elif cd.lam_a + float(cd.d @ beta) >= 0.0 and len(loose) < 10:
            loose.append(beta)
    for beta in strict:
        reports.append(oracle.exposing_witness(cd, beta, fs)[1])
    if np.linalg.norm(cd.lam + cd.a) > 1e-9:
        for beta in loose:
            reports.append(oracle.asymptote_sequence(cd, beta, 1000)[2])
    return reports


def cmd_verify(inst, args) -> int:
    cf = spectral.canonicalize(_to_qc(inst), zero_tol=args.tol)
    if args.force_free_set:
        name = args.force_free_set.upper()
        if name != "CGLAMBDA":
            raise ParseError(f"cannot force free set {name!r}")
        fs = freesets.CGLambda(
            cf.n, cf.m, cf.l, cd=CaseData(cf.lam, cf.a, cf.d), forced=True
        )
    else:
        fs = freesets.build_free_set(cf)
    samples = oracle.freeness_samples(cf, fs, args.samples, args.seed)
    reports = [oracle.check_freeness(fs, samples, seed=args.seed)]
    if cf.case in (spectral.CASE_CASE2_CR, spectral.CASE_CASE2_CR_LAMBDA_NEG_A):
        reports.extend(_case2_reports(cf, fs, samples, args.seed))
    if "rays" in inst:
        cone = cuts.SimplicialCone(apex=inst["point"], R=inst["rays"])
        cert = cuts.intersection_cut(cone, cf, fs)
        reports.append(
            oracle.check_cut_validity(_to_qc(inst), cert, seed=args.seed)
        )
    passed = all(r.passed for r in reports)
    sys.stdout.write(
        emit_json({"passed": passed, "reports": [r.as_dict() for r in reports]})
    )
    return 0 if passed else 1


# --- plotting ---------------------------------------------------------------


def _newton_project(f, v, target=1e-8, iters=30, fd=1e-5):
    v = np.asarray(v, dtype=float).copy()
    for _ in range(iters):
        val = f(v)
        if abs(val) <= target:
            return v
        grad = np.array(
            [
                (f(v + fd * e) - f(v - fd * e)) / (2 * fd)
                for e in np.eye(len(v))
            ]
        )
        g2 = float(grad @ grad)
        if g2 <= 1e-18:
            return None
        v -= val * grad / g2
    return v if abs(f(v)) <= 1e-6 else None


def _marching_squares(F, xs, ys):
    """Zero-level segments of a grid sampling, by edge interpolation."""
    segments = []
    for i in range(len(xs) - 1):
        for j in range(len(ys) - 1):
            corners = [
                (F[i, j], xs[i], ys[j]),
                (F[i + 1, j], xs[i + 1], ys[j]),
                (F[i + 1, j + 1], xs[i + 1], ys[j + 1]),
                (F[i, j + 1], xs[i], ys[j + 1]),
            ]
            pts = []
            for k in range(4):
                f0, x0, y0 = corners[k]
                f1, x1, y1 = corners[(k + 1) % 4]
                if (f0 < 0) != (f1 < 0):
                    t = f0 / (f0 - f1)
                    pts.append((x0 + t * (x1 - x0), y0 + t * (y1 - y0)))
            for k in range(0, len(pts) - 1, 2):
                segments.append([pts[k], pts[k + 1]])
    return segments


def _plot_layer_2d(f, box, grid=200):
    xs = np.linspace(-box, box, grid)
    ys = np.linspace(-box, box, grid)
    F = np.array([[f(np.array([x, y])) for y in ys] for x in xs])
    polylines = []
    for seg in _marching_squares(F, xs, ys):
        proj = [_newton_project(f, np.array(v)) for v in seg]
        if all(v is not None for v in proj):
            polylines.append([list(map(float, v)) for v in proj])
    return {"kind": "polylines", "polylines": polylines}


def _plot_layer_3d(f, box, grid=48):
    try:
        from skimage import measure
    except ImportError as exc:  # pragma: no cover
        raise ParseError("3-D plotting requires scikit-image") from exc
    axis = np.linspace(-box, box, grid)
    F = np.array(
        [[[f(np.array([x, y, z])) for z in axis] for y in axis] for x in axis]
    )
    try:
        verts, faces, _, _ = measure.marching_cubes(F, level=0.0)
    except (ValueError, RuntimeError):
        return {"kind": "trimesh", "vertices": [], "faces": []}
    step = axis[1] - axis[0]
    verts = verts * step - box
    kept, remap = [], {}
    for idx, v in enumerate(verts):
        proj = _newton_project(f, v)
        if proj is not None:
            remap[idx] = len(kept)
            kept.append([float(t) for t in proj])
    faces_out = [
        [remap[i] for i in face]
        for face in faces
        if all(i in remap for i in face)
    ]
    return {"kind": "trimesh", "vertices": kept, "faces": faces_out}


def cmd_plot(inst, args) -> int:
    p = inst["dim"]
    if p not in (2, 3):
        raise ParseError("plotting supports 2 or 3 variables only")
    qc = _to_qc(inst)
    cf = spectral.canonicalize(qc, zero_tol=args.tol)
    fs = freesets.build_free_set(cf)
    wanted = [s for s in (args.layers or "S,freeset").split(",") if s]
    box = max(5.0, 1.5 * float(np.max(np.abs(inst["point"]))) + 3.0)
    maker = _plot_layer_2d if p == 2 else _plot_layer_3d
    layers = {}
    if "S" in wanted:
        layers["S"] = maker(lambda s: qc(s), box)
    if "freeset" in wanted:
        layers["freeset"] = maker(lambda s: float(fs.margin(cf.map_point(s))), box)
    digest = hashlib.sha256(emit_json(inst["raw"]).encode()).hexdigest()
    payload = {
        "layers": layers,
        "metadata": {"instance_sha256": digest, "seed": args.seed, "box": box},
    }
    sys.stdout.write(emit_json(payload))
    return 0


# --- cutting loop -----------------------------------------------------------


def _as_leq(constraints):
    rows = []
    for coef, rhs, sense in constraints:
        if sense in ("<=", "="):
            rows.append((np.asarray(coef, dtype=float), float(rhs)))
        if sense in (">=", "="):
            rows.append((-np.asarray(coef, dtype=float), -float(rhs)))
    return rows


def cmd_loop(inst, args) -> int:
    if "objective" not in inst or "linear_constraints" not in inst:
        raise ParseError("loop command needs objective and linear_constraints")
    p = inst["dim"]
    obj = inst["objective"]
    rows = _as_leq(inst["linear_constraints"])
    Q, b, c = inst["Q"], inst["b"], inst["c"]

    def q_of(s):
        return float(s @ Q @ s + b @ s + c)

    sys.stdout.write(
        json.dumps({"objective_direction": "nondecreasing", "max_iters": args.max_iters})
        + "\n"
    )
    for it in range(args.max_iters + 1):
        A = np.array([r[0] for r in rows])
        rhs = np.array([r[1] for r in rows])
        try:
            s_star, value = lp.solve_lp(obj, A, rhs)
        except lp.InfeasibleLPError as exc:
            raise EmptySError(f"LP infeasible after cuts: {exc}") from exc
        viol = q_of(s_star)
        record = {
            "iter": it,
            "objective": value,
            "violation": viol,
            "vertex": [float(v) for v in s_star],
        }
        if viol <= 1e-6:
            record["converged"] = True
            sys.stdout.write(json.dumps(record) + "\n")
            return 0
        tight = [i for i in range(len(rows)) if abs(A[i] @ s_star - rhs[i]) <= 1e-7]
        if len(tight) != p:
            raise DegenerateVertexError(
                f"{len(tight)} tight constraints at the vertex, need {p}"
            )
        A_t = A[tight]
        if np.linalg.cond(A_t) > 1e10:
            raise DegenerateVertexError("tight constraints are rank deficient")
        R = -np.linalg.inv(A_t)
        cone = cuts.SimplicialCone(apex=s_star, R=R)
        qc = spectral.QuadraticConstraint(Q=Q, b=b, c=c, point=s_star)
        cert = cuts.separate(qc, cone, zero_tol=args.tol)
        rows.append((cert.coef, cert.rhs))
        record["cut"] = {"coef": [float(v) for v in cert.coef], "rhs": cert.rhs}
        sys.stdout.write(json.dumps(record) + "\n")
    return 0


# --- entry point ------------------------------------------------------------


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="quadfree",
        description="Maximal quadratic-free sets and intersection cuts",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("canon", cmd_canon),
        ("cut", cmd_cut),
        ("verify", cmd_verify),
        ("plot", cmd_plot),
        ("loop", cmd_loop),
    ):
        sp = sub.add_parser(name)
        sp.add_argument("instance")
        sp.add_argument("--samples", type=int, default=10_000)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--max-iters", type=int, default=50)
        sp.add_argument("--layers", type=str, default="S,freeset")
        sp.add_argument("--tol", type=float, default=1e-9)
        sp.add_argument("--force-free-set", type=str, default=None)
        sp.set_defaults(fn=fn)
    return parser


_EXIT_CODES = (
    (NotSeparableError, 2),
    (ParseError, 3),
    (AllRaysRecessionError, 4),
    (EmptySError, 5),
    (UnboundedLPError, 6),
    (DegenerateVertexError, 7),
)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    env_seed = os.environ.get("QUADFREE_SEED")
    if env_seed is not None:
        try:
            args.seed = int(env_seed)
        except ValueError:
            print("ignoring malformed QUADFREE_SEED", file=sys.stderr)
    try:
        inst = parse_instance(args.instance)
        return args.fn(inst, args)
    except tuple(exc for exc, _ in _EXIT_CODES) as exc:
        for exc_type, code in _EXIT_CODES:
            if isinstance(exc, exc_type):
                print(f"{exc_type.__name__}: {exc}", file=sys.stderr)
                return code
        raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
