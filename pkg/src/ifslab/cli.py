"""Command-line entry point: ``chaosgame render|converge|seqgen|cgr|rapunzel|fibre``.

Experiments are described by one JSON document::

    {"space": "plane" | "sphere",
     "maps": [{"kind": "affine2d", "matrix": [a, b, c, d], "translation": [e, f]}
              | {"kind": "mobius", "matrix": [[re, im], [re, im], [re, im], [re, im]]}],
     "stream": {"kind": ..., "seed": 0, ...},
     "x0": [x, y] | [re, im] | "inf",
     "kmax": 100000, "Ks": [1000], "delta": 0.005, "epsilon": 0.02}

``"builtin": "sierpinski" | "mobius-pair" | "halving-pair"`` may replace
``space`` and ``maps``.  Exit codes: 0 success, 1 criterion failure, 2
usage or configuration error.
"""

import argparse
import json
import sys

import jsonschema

from . import imaging
from .chaosgame import (
    fibre_estimate,
    fibre_intersection_check,
    rapunzel_experiment,
    run_orbit,
    tail_estimate,
    tail_points,
    convergence_profile,
)
from .errors import BudgetExceeded, InvalidInput, OrbitEscape
from .hyperspace import INF, PointCloud
from .ifs_core import Ifs, halving_pair, iterate_hutchinson, make_map, mobius_pair, sierpinski, dual_ifs
from .symbols import (
    Bernoulli,
    CompleteConnections,
    Markov,
    champernowne_stream,
    explicit_stream,
    forbidden_22_chain,
    markov_base,
    periodic_stream,
    stochastic_stream,
)

BUILTINS = {
    "sierpinski": sierpinski,
    "mobius-pair": mobius_pair,
    "halving-pair": halving_pair,
}

# attractor seed, repeller seed
BUILTIN_SEEDS = {
    "sierpinski": ([0.0, 0.0], None),
    "mobius-pair": ([0.0, 0.0], "inf"),
    "halving-pair": ([0.0, 0.0], "inf"),
}

_number = {"type": "number"}
_point = {
    "oneOf": [
        {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
        {"type": "string", "enum": ["inf"]},
    ]
}
_prob = {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1}

MAP_SCHEMA = {
    "type": "object",
    "required": ["kind", "matrix"],
    "properties": {
        "kind": {"enum": ["affine2d", "mobius"]},
        "matrix": {"type": "array"},
        "translation": {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
    },
    "allOf": [
        {
            "if": {"properties": {"kind": {"const": "affine2d"}}},
            "then": {
                "required": ["translation"],
                "properties": {"matrix": {"items": _number, "minItems": 4, "maxItems": 4}},
            },
        },
        {
            "if": {"properties": {"kind": {"const": "mobius"}}},
            "then": {
                "properties": {
                    "matrix": {
                        "items": {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
                        "minItems": 4,
                        "maxItems": 4,
                    }
                }
            },
        },
    ],
}

STREAM_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["champernowne", "bernoulli", "markov", "ccc", "periodic", "explicit"]},
        "N": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "probs": _prob,
        "initial": _prob,
        "transition": {"type": "array", "items": _prob},
        "alpha": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "base": {
            "type": "object",
            "required": ["initial", "transition"],
            "properties": {"initial": _prob, "transition": {"type": "array", "items": _prob}},
        },
        "word": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "symbols": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
    },
    "allOf": [
        {"if": {"properties": {"kind": {"const": "bernoulli"}}}, "then": {"required": ["probs"]}},
        {"if": {"properties": {"kind": {"const": "markov"}}}, "then": {"required": ["initial", "transition"]}},
        {"if": {"properties": {"kind": {"const": "ccc"}}}, "then": {"required": ["alpha"]}},
        {"if": {"properties": {"kind": {"const": "periodic"}}}, "then": {"required": ["word"]}},
        {"if": {"properties": {"kind": {"const": "explicit"}}}, "then": {"required": ["symbols"]}},
    ],
}

CONFIG_PROPERTIES = {
    "builtin": {"enum": sorted(BUILTINS)},
    "space": {"enum": ["plane", "sphere"]},
    "maps": {"type": "array", "items": MAP_SCHEMA, "minItems": 1},
    "stream": STREAM_SCHEMA,
    "x0": _point,
    "dual_x0": _point,
    "kmax": {"type": "integer", "minimum": 1},
    "Ks": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
    "delta": {"type": "number", "exclusiveMinimum": 0},
    "epsilon": {"type": "number", "exclusiveMinimum": 0},
    "threshold": {"type": "number", "exclusiveMinimum": 0},
    "reference": {
        "type": "object",
        "properties": {
            "k": {"type": "integer", "minimum": 1},
            "delta": {"type": "number", "exclusiveMinimum": 0},
            "seed": _point,
            "dual_seed": _point,
        },
    },
    "viewport": {"type": "array", "items": _number, "minItems": 4, "maxItems": 4},
    "image": {
        "type": "object",
        "properties": {"width": {"type": "integer", "minimum": 1}, "height": {"type": "integer", "minimum": 1}},
    },
    "rho": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
    "out": {"type": "string"},
}

_IFS_REQUIRED = {
    "if": {"not": {"required": ["builtin"]}},
    "then": {"required": ["space", "maps"]},
}

COMMAND_REQUIRED = {
    "render": ["stream", "x0", "kmax", "Ks"],
    "converge": ["stream", "x0", "kmax", "Ks", "delta"],
    "rapunzel": ["stream", "x0", "kmax", "Ks", "delta", "epsilon"],
    "fibre": ["stream", "x0", "kmax", "Ks", "delta", "epsilon", "rho"],
}


def config_schema(command):
    if command == "seqgen":
        return {"type": "object", "required": ["stream"], "properties": {"stream": STREAM_SCHEMA, "out": {"type": "string"}}}
    return {
        "type": "object",
        "required": COMMAND_REQUIRED[command],
        "properties": CONFIG_PROPERTIES,
        "allOf": [_IFS_REQUIRED],
    }


class ConfigError(Exception):
    pass


def validate_config(cfg, command):
    """Schema check plus the cross-field invariants; raises :class:`ConfigError`."""
    try:
        jsonschema.validate(cfg, config_schema(command))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path)
        raise ConfigError(f"config error{' at ' + where if where else ''}: {exc.message}") from None
    if command != "seqgen" and max(cfg["Ks"]) > cfg["kmax"]:
        raise ConfigError(f"config error: kmax ({cfg['kmax']}) must be >= max(Ks) ({max(cfg['Ks'])})")


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


def load_config(path, command):
    cfg = _read_json(path)
    validate_config(cfg, command)
    return cfg


def parse_point(v, space):
    if v == "inf":
        if space != "sphere":
            raise ConfigError("config error: 'inf' is only a point of the sphere")
        return INF
    if space == "plane":
        return (float(v[0]), float(v[1]))
    return complex(v[0], v[1])


def build_ifs(cfg):
    if "builtin" in cfg:
        return BUILTINS[cfg["builtin"]]()
    maps = []
    for i, m in enumerate(cfg["maps"], 1):
        if m["kind"] == "mobius":
            matrix = [complex(re, im) for re, im in m["matrix"]]
            maps.append(make_map("mobius", matrix))
        else:
            maps.append(make_map("affine2d", m["matrix"], m["translation"]))
    return Ifs(cfg["space"], tuple(maps))


def build_stream(scfg, n_default=None):
    kind = scfg["kind"]
    seed = int(scfg.get("seed", 0))
    n = scfg.get("N", n_default)
    if kind == "champernowne":
        if n is None:
            raise ConfigError("config error at stream: 'N' is a required property")
        return champernowne_stream(n)
    if kind == "periodic":
        return periodic_stream(scfg["word"], n)
    if kind == "explicit":
        return explicit_stream(scfg["symbols"], n)
    if kind == "bernoulli":
        return stochastic_stream(Bernoulli(scfg["probs"]), seed)
    if kind == "markov":
        return stochastic_stream(Markov(scfg["initial"], scfg["transition"]), seed)
    if n is None:
        raise ConfigError("config error at stream: 'N' is a required property")
    if "base" in scfg:
        base = Markov(scfg["base"]["initial"], scfg["base"]["transition"])
    else:
        base = forbidden_22_chain(n)
    return stochastic_stream(CompleteConnections(markov_base(base), scfg["alpha"], n), seed)


def _stream_factory(cfg, f):
    return lambda: build_stream(cfg["stream"], f.n)


def _reference(cfg, f, dual=False):
    ref = cfg.get("reference", {})
    key = "dual_seed" if dual else "seed"
    seed = ref.get(key)
    if seed is None and "builtin" in cfg:
        seed = BUILTIN_SEEDS[cfg["builtin"]][1 if dual else 0]
    if seed is None:
        if dual:
            raise ConfigError("config error at reference: 'dual_seed' is a required property")
        seed = cfg["x0"]
    g = dual_ifs(f) if dual else f
    k = ref.get("k", 12)
    delta = ref.get("delta", cfg["delta"])
    return iterate_hutchinson(g, PointCloud.of([parse_point(seed, f.space)], f.space), k, delta)


def _orbit(cfg, f):
    return run_orbit(f, parse_point(cfg["x0"], f.space), build_stream(cfg["stream"], f.n), cfg["kmax"])


def _out_path(args, cfg, fallback=None):
    path = args.out or cfg.get("out") or fallback
    if path is None:
        raise ConfigError("no output path: pass --out or set 'out' in the config")
    return path


def _write_text(path, text):
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def cmd_render(args, cfg):
    f = build_ifs(cfg)
    orbit = _orbit(cfg, f)
    tail = tail_points(orbit, min(cfg["Ks"]))
    image = cfg.get("image", {})
    width, height = image.get("width", 512), image.get("height", 512)
    viewport = cfg.get("viewport") or (
        [-2.0, 2.0, -2.0, 2.0] if f.space == "sphere" else imaging.default_viewport(tail)
    )
    mask = imaging.rasterize(imaging.planar_coords(tail), viewport, width, height)
    imaging.write_ppm(_out_path(args, cfg), mask)
    return 0


def format_profile(profile):
    return "K,hausdorff\n" + "".join(f"{K},{h:.9g}\n" for K, h in profile)


def cmd_converge(args, cfg):
    f = build_ifs(cfg)
    a_ref = _reference(cfg, f)
    orbit = _orbit(cfg, f)
    profile = convergence_profile(orbit, a_ref, cfg["Ks"], cfg["delta"])
    _write_text(_out_path(args, cfg, "-"), format_profile(profile))
    if "threshold" in cfg and profile[-1][1] > cfg["threshold"]:
        return 1
    return 0


def cmd_seqgen(args, cfg):
    if args.count < 1:
        raise ConfigError("--count must be >= 1")
    stream = build_stream(cfg["stream"])
    syms = stream.take(args.count)
    _write_text(_out_path(args, cfg, "-"), "".join(f"{s}\n" for s in syms.tolist()))
    return 0


def cmd_cgr(args, cfg):
    alphabet = args.alphabet or cfg.get("alphabet")
    if not alphabet:
        raise ConfigError("no alphabet: pass --alphabet")
    src = args.input or cfg.get("input")
    if not src:
        raise ConfigError("no input file: pass --input")
    try:
        with open(src) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read input {src}: {exc}") from None
    symbols = imaging.encode(text, alphabet)
    if len(symbols) == 0:
        raise ConfigError("input string is empty")
    orbit = imaging.cgr_orbit(symbols, len(alphabet))
    pts = orbit.points[1:]
    size = args.size or cfg.get("size", 512)
    mask = imaging.rasterize(pts, (-0.01, 1.01, -0.01, 1.01), size, size)
    imaging.write_ppm(_out_path(args, cfg), mask)
    hist_path = args.hist or cfg.get("hist")
    if hist_path:
        grid = args.grid or cfg.get("grid", 32)
        _write_text(hist_path, imaging.histogram_csv(imaging.occupancy_histogram(pts, grid)))
    return 0


def cmd_rapunzel(args, cfg):
    f = build_ifs(cfg)
    a_ref = _reference(cfg, f)
    a_star = _reference(cfg, f, dual=True)
    x0 = parse_point(cfg["x0"], f.space)
    dual_x0 = parse_point(cfg["dual_x0"], f.space) if "dual_x0" in cfg else None
    report = rapunzel_experiment(
        f, x0, _stream_factory(cfg, f), cfg["kmax"], cfg["Ks"], cfg["delta"], a_ref, a_star,
        dual_x0=dual_x0, escape_threshold=cfg["epsilon"],
    )
    _write_text(_out_path(args, cfg, "-"), report.to_text())
    return 0 if report.passed(cfg["epsilon"]) else 1


def cmd_fibre(args, cfg):
    f = build_ifs(cfg)
    a_ref = _reference(cfg, f)
    orbit = _orbit(cfg, f)
    tail = tail_estimate(orbit, min(cfg["Ks"]), cfg["delta"])
    fib = fibre_estimate(f, a_ref, cfg["rho"], cfg["delta"])
    res = fibre_intersection_check(tail, fib, cfg["epsilon"])
    text = (
        f"address: {' '.join(str(s) for s in fib.address_prefix)}\n"
        f"fibre_points: {len(fib.cloud)}\n"
        f"diameter: {fib.diameter:.9g}\n"
        f"min_distance: {res.min_distance:.9g}\n"
        f"meets: {'true' if res.meets else 'false'}\n"
    )
    _write_text(_out_path(args, cfg, "-"), text)
    return 0 if res.meets else 1


COMMANDS = {
    "render": cmd_render,
    "converge": cmd_converge,
    "seqgen": cmd_seqgen,
    "cgr": cmd_cgr,
    "rapunzel": cmd_rapunzel,
    "fibre": cmd_fibre,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="chaosgame", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--out", help="output path ('-' for stdout where text)")
        p.add_argument("--seed", type=int, help="overrides stream.seed")
        if name == "seqgen":
            p.add_argument("--count", type=int, required=True)
            p.add_argument("--stream", help="inline JSON stream object instead of --config")
        if name == "cgr":
            p.add_argument("--input", help="text file holding the data string")
            p.add_argument("--alphabet", help="characters in symbol order, e.g. ACGT")
            p.add_argument("--hist", help="occupancy histogram CSV path")
            p.add_argument("--grid", type=int, help="histogram cells per side (default 32)")
            p.add_argument("--size", type=int, help="image width and height (default 512)")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "seqgen" and args.stream:
            cfg = {"stream": json.loads(args.stream)}
            validate_config(cfg, "seqgen")
        elif args.command == "cgr":
            cfg = _read_json(args.config) if args.config else {}
        elif args.config:
            cfg = load_config(args.config, args.command)
        else:
            raise ConfigError("--config is required")
        if args.seed is not None and "stream" in cfg:
            cfg["stream"]["seed"] = args.seed
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, InvalidInput, json.JSONDecodeError) as exc:
        print(f"chaosgame {args.command}: {exc}", file=sys.stderr)
        return 2
    except (BudgetExceeded, OrbitEscape) as exc:
        print(f"chaosgame {args.command}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"chaosgame {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
