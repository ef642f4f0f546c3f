"""Command line front end: one JSON config, one command, files out.

    causalpaths <geodesics|census|discrete|functor-check> --config cfg.json [--out DIR] [--plot]

Exit status 0 on success, 2 for configuration or input errors, 3 for
degenerate inputs, 4 when a numerical method does not converge.  Failures
print one JSON object on stderr.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from . import discrete as dsc
from . import geodesics as geo
from . import morse
from . import surfaces as sf
from .errors import CausalPathsError, InputError

COMMANDS = ("geodesics", "census", "discrete", "functor-check")

_NUMERIC = {
    "n_angles": geo.N_ANGLES,
    "step": sf.DEFAULT_STEP,
    "bvp_tol": geo.BVP_TOL,
    "conj_tol": geo.CONJ_TOL,
}

DEFAULTS = {
    "geodesics": {
        "surface": {"kind": "ellipsoid", "a": 1.0, "b": 1.0, "c": 2.0},
        "p": [1.0, 0.0, 0.0],
        "q": [0.0, 1.0, 0.0],
        "L_max": 6.0,
        **_NUMERIC,
        "plot": False,
    },
    "census": {
        "surface": {"kind": "ellipsoid", "a": 1.0, "b": 1.0, "c": 2.0},
        "p": [1.0, 0.0, 0.0],
        "q": [0.0, 1.0, 0.0],
        "T_max": 6.0,
        **_NUMERIC,
        "n_bumps": morse.N_BUMPS,
        "bump_amplitude": morse.BUMP_AMPLITUDE,
        "T_grid": None,
        "plot": False,
    },
    "discrete": {
        "spacetime": None,
        "flavors": list(dsc.FLAVORS),
        "pairs": None,
    },
    "functor-check": {
        "source": None,
        "target": None,
        "map": None,
        "flavor": dsc.TIMELIKE,
    },
}

_POSITIVE = ("L_max", "T_max", "n_angles", "step", "bvp_tol", "conj_tol", "n_bumps", "bump_amplitude")


class ConfigError(InputError):
    kind = "config"


# --------------------------------------------------------------------------
# config


def load_config(path, command):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return effective_config(raw, command, base=os.path.dirname(os.path.abspath(path)))


def effective_config(raw, command, base="."):
    """Fill defaults and validate; relative file references resolve against ``base``."""
    raw = dict(raw)
    cmd = raw.pop("command", command)
    if cmd != command:
        raise ConfigError(f"config is for command {cmd!r}, but {command!r} was requested")
    raw.pop("out", None)
    defaults = DEFAULTS[command]
    unknown = sorted(set(raw) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {unknown}")
    cfg = {"command": command, **json.loads(json.dumps(defaults)), **raw}
    for key in _POSITIVE:
        if key in cfg:
            val = cfg[key]
            if isinstance(val, bool) or not isinstance(val, (int, float)) or not val > 0 or not math.isfinite(val):
                raise ConfigError(f"{key} must be a positive number, got {val!r}")
    if "n_angles" in cfg and int(cfg["n_angles"]) != cfg["n_angles"]:
        raise ConfigError("n_angles must be an integer")
    if "plot" in cfg and not isinstance(cfg["plot"], bool):
        raise ConfigError("plot must be true or false")
    if command in ("discrete",):
        cfg["spacetime"] = _resolve_spacetime(cfg["spacetime"], base, "spacetime")
        bad = [f for f in cfg["flavors"] if f not in dsc.FLAVORS]
        if bad or not cfg["flavors"]:
            raise ConfigError(f"flavors must be a nonempty subset of {list(dsc.FLAVORS)}")
    if command == "functor-check":
        cfg["source"] = _resolve_spacetime(cfg["source"], base, "source")
        cfg["target"] = _resolve_spacetime(cfg["target"], base, "target")
        if cfg["flavor"] not in dsc.FLAVORS:
            raise ConfigError(f"flavor must be one of {list(dsc.FLAVORS)}")
        if not isinstance(cfg["map"], (dict, list)):
            raise ConfigError("map must be an object {vertex: image} or a list of [vertex, image] pairs")
    return cfg


def _resolve_spacetime(spec, base, name):
    """Inline spacetime, ``{"example": name}`` or ``{"file": path}``; returned in a JSON-able form."""
    if spec is None:
        raise ConfigError(f"{name} is required")
    if isinstance(spec, str):
        spec = {"file": spec}
    if not isinstance(spec, dict):
        raise ConfigError(f"{name} must be an object")
    if "example" in spec:
        dsc.example(spec["example"])
        return {"example": spec["example"]}
    if "file" in spec:
        path = os.path.join(base, spec["file"])
        if not os.path.exists(path):
            raise ConfigError(f"{name} file {spec['file']} does not exist")
        with open(path) as fh:
            try:
                return json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{name} file {spec['file']} is not valid JSON: {exc}") from None
    return spec


def _spacetime(spec):
    if "example" in spec:
        return dsc.example(spec["example"])
    return dsc.DiscreteSpacetime.from_dict(spec)


# --------------------------------------------------------------------------
# output


def _write(path, text):
    """Atomic write: temp file in the target directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path, obj):
    _write(path, json.dumps(_jsonable(obj), indent=2, sort_keys=False) + "\n")


def _write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    _write(path, buf.getvalue())


def _save_plot(save, path, *args):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".svg")
    os.close(fd)
    try:
        save(*args, tmp)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


# --------------------------------------------------------------------------
# commands


def _geometry(cfg):
    surface = sf.Surface.from_dict(cfg["surface"])
    p = sf.as_point(surface, cfg["p"])
    q = sf.as_point(surface, cfg["q"])
    knobs = {k: cfg[k] for k in _NUMERIC}
    knobs["n_angles"] = int(knobs["n_angles"])
    return surface, p, q, knobs


def run_geodesics(cfg, out, plot):
    surface, p, q, knobs = _geometry(cfg)
    records = geo.find_geodesics(surface, p, q, cfg["L_max"], **knobs)
    _write_csv(os.path.join(out, "geodesics.csv"), ["length", "index", "initial_angle", "degenerate_flag"],
               [r.row() for r in records])
    written = ["geodesics.csv"]
    if plot:
        from . import plotting

        _save_plot(plotting.save_geodesics_plot, os.path.join(out, "geodesics.svg"), surface, records)
        written.append("geodesics.svg")
    return written


def default_grid(T_max, events=()):
    """Tenths, quarter multiples of pi, and the event lengths, up to ``T_max``."""
    pts = {round(0.1 * k, 10) for k in range(int(T_max * 10 + 1e-9) + 1)}
    pts |= {k * math.pi / 4 for k in range(int(T_max / (math.pi / 4)) + 1)}
    pts |= {e for e in events if e <= T_max}
    out = []
    for t in sorted(t for t in pts if 0 <= t <= T_max):
        if out and t - out[-1] < 1e-9:
            continue
        out.append(t)
    return out


def run_census(cfg, out, plot):
    surface, p, q, knobs = _geometry(cfg)
    census = morse.build_census(surface, p, q, cfg["T_max"], n_bumps=int(cfg["n_bumps"]),
                                bump_amplitude=cfg["bump_amplitude"], **knobs)
    grid = cfg["T_grid"]
    if grid is None:
        grid = default_grid(census.T_max, census.event_lengths())
    rows = []
    for T in grid:
        rows.append([f"{T:.12g}", census.count(T, morse.TIMELIKE), census.count(T, morse.CAUSAL)])
    data = {"config": cfg, **census.to_dict()}
    data["merges"] = [
        {"l": m.length, "class_a": m.class_a, "class_b": m.class_b,
         "witness": next(g for g, r in census.records.items() if r is m.witness)}
        for m in morse.non_hausdorff_certificate(census)
    ]
    _write_json(os.path.join(out, "census.json"), data)
    _write_csv(os.path.join(out, "counts.csv"), ["T", "timelike", "causal"], rows)
    written = ["census.json", "counts.csv"]
    if plot:
        from . import plotting

        _save_plot(plotting.save_census_plot, os.path.join(out, "census.svg"), census)
        written.append("census.svg")
    return written


def _pairs(X, cfg):
    if cfg["pairs"] is None:
        key = dsc._key
        vs = sorted(X.vertices, key=key)
        return [(x, y) for x in vs for y in vs]
    try:
        pairs = [(x, y) for x, y in cfg["pairs"]]
    except (TypeError, ValueError):
        raise ConfigError("pairs must be a list of [x, y] vertex pairs") from None
    for x, y in pairs:
        X._require_vertex(x, y)
    return pairs


def run_discrete(cfg, out, plot):
    X = _spacetime(cfg["spacetime"])
    pairs = _pairs(X, cfg)
    classes, diamonds, axioms = {}, {}, {}
    for flavor in cfg["flavors"]:
        homs, dias = [], []
        for x, y in pairs:
            cls = dsc.homotopy_classes(X, x, y, flavor)
            paths = dsc.enumerate_paths(X, x, y, flavor)
            if not paths:
                continue
            homs.append({"start": x, "end": y, "n_paths": len(paths), "n_classes": len(cls),
                         "classes": [c.to_dict() for c in cls]})
            for c in cls:
                dias.append({"class": c.to_dict(), "diamond": sorted(dsc.diamond(X, c), key=dsc._key)})
        classes[flavor] = homs
        diamonds[flavor] = dias
        axioms[flavor] = dsc.check_axioms(X, flavor).to_dict()
    meta = {"config": cfg, "max_path_len": X.max_path_len}
    _write_json(os.path.join(out, "classes.json"), {**meta, "hom_sets": classes})
    _write_json(os.path.join(out, "diamonds.json"), {**meta, "diamonds": diamonds})
    _write_json(os.path.join(out, "axiom_report.json"), {**meta, "reports": axioms})
    return ["classes.json", "diamonds.json", "axiom_report.json"]


def run_functor_check(cfg, out, plot):
    X = _spacetime(cfg["source"])
    Y = _spacetime(cfg["target"])
    f = cfg["map"]
    f = dict(f.items()) if isinstance(f, dict) else {a: b for a, b in f}
    # JSON object keys are strings; match them back to integer vertex ids
    ids = {str(v): v for v in X.vertices}
    f = {ids.get(k, k) if isinstance(k, str) else k: v for k, v in f.items()}
    report = dsc.induced_functor(f, X, Y, cfg["flavor"])
    _write_json(os.path.join(out, "functor_report.json"), {"config": cfg, **report.to_dict()})
    return ["functor_report.json"]


RUNNERS = {
    "geodesics": run_geodesics,
    "census": run_census,
    "discrete": run_discrete,
    "functor-check": run_functor_check,
}


def run(command, cfg, out=".", plot=False):
    """Run one command on an effective config; returns the names of the files written."""
    os.makedirs(out, exist_ok=True)
    plot = bool(plot or cfg.get("plot", False))
    return RUNNERS[command](cfg, out, plot)


def _diagnostic(exc, code):
    info = {"error": getattr(exc, "kind", type(exc).__name__), "exit_code": code, "message": str(exc)}
    g = getattr(exc, "geodesic", None)
    if g is not None:
        info["geodesic"] = _jsonable(g.to_dict())
    return json.dumps(info)


class UsageError(InputError):
    kind = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    ap = _Parser(prog="causalpaths", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON config file")
    ap.add_argument("--out", default=None, help="output directory (default: config 'out' or .)")
    ap.add_argument("--plot", action="store_true", help="also render SVG figures")
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except UsageError as exc:
        print(_diagnostic(exc, exc.exit_code), file=sys.stderr)
        return exc.exit_code
    except SystemExit as exc:
        # --help / --version
        return exc.code or 0
    try:
        cfg = load_config(args.config, args.command)
        out = args.out
        if out is None:
            with open(args.config) as fh:
                out = json.load(fh).get("out") or "."
        written = run(args.command, cfg, out, args.plot)
    except CausalPathsError as exc:
        print(_diagnostic(exc, exc.exit_code), file=sys.stderr)
        return exc.exit_code
    for name in written:
        print(os.path.join(out, name))
    return 0


if __name__ == "__main__":
    sys.exit(main())
