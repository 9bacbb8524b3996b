"""Run configuration: TOML file -> validated settings.

Every problem found is collected, with its field path, before anything is
reported, so a broken file is fixed in one pass.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .evolution import PerturbationSpec
from .model import PotentialSpec
from .pipeline import RunSpec

SCHEMA = {
    "grid": {"N": 1, "L": 80.0, "n": 4096},
    "physics": {
        "m": 1.0, "nu": 3.0, "coeff": 1.0, "epsilon": 0.2, "potential": "harmonic",
        "stiffness": 1.0, "slope": [0.0], "depth": 1.0, "width": 1.0, "center": [0.0],
    },
    "initial": {
        "qbar": [2.0], "pbar": [0.0], "perturbation": "zero", "amplitude": 0.0,
        "pert_width": 1.0, "offset": [0.0], "M_bound": None,
    },
    "time": {"dt": 1e-3, "T": 4.0, "sample_stride": 10, "checkpoint_stride": 0},
    "halo": {"eta": "equal-epsilon", "oversample": 8},
    "output": {"directory": "runs", "formats": ["csv", "json", "checkpoint", "svg"]},
    "ground_state": {"tol": 1e-8},
    "sweep": {"epsilons": [0.4, 0.3, 0.2, 0.15, 0.1], "workers": 1},
}
OPTIONAL_SECTIONS = ("ground_state", "sweep")
FORMATS = ("csv", "json", "checkpoint", "svg")


@dataclass(frozen=True)
class RunConfig:
    run: RunSpec
    output_dir: str
    formats: tuple
    sweep_eps: tuple
    workers: int
    settings: dict = field(repr=False, compare=False)

    def content_hash(self) -> str:
        text = json.dumps(self.settings, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def _num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _vector(v):
    if _num(v):
        return [float(v)]
    if isinstance(v, list) and v and all(_num(x) for x in v):
        return [float(x) for x in v]
    return None


class _Checker:
    def __init__(self):
        self.violations = []

    def fail(self, path, msg):
        self.violations.append(f"{path}: {msg}")

    def number(self, s, path, key, positive=False, nonneg=False):
        v = s[key]
        if not _num(v):
            self.fail(path, f"expected a number, got {v!r}")
            return None
        if positive and not v > 0:
            self.fail(path, f"must be positive, got {v}")
        if nonneg and not v >= 0:
            self.fail(path, f"must be nonnegative, got {v}")
        return float(v)

    def integer(self, s, path, key, minimum=None):
        v = s[key]
        if not _int(v):
            self.fail(path, f"expected an integer, got {v!r}")
            return None
        if minimum is not None and v < minimum:
            self.fail(path, f"must be at least {minimum}, got {v}")
        return int(v)


def parse_settings(raw: dict) -> tuple:
    """Merge ``raw`` over the defaults, rejecting unknown sections and keys."""
    bad = []
    merged = {}
    for sec, keys in raw.items():
        if sec not in SCHEMA:
            bad.append(f"[{sec}]: unknown section")
            continue
        if not isinstance(keys, dict):
            bad.append(f"[{sec}]: expected a table")
            continue
        for k in keys:
            if k not in SCHEMA[sec]:
                bad.append(f"[{sec}].{k}: unknown key")
    for sec, defaults in SCHEMA.items():
        given = raw.get(sec, {}) if isinstance(raw.get(sec, {}), dict) else {}
        merged[sec] = {k: given.get(k, d) for k, d in defaults.items()}
    return merged, bad


def validate(raw: dict) -> RunConfig:
    s, unknown = parse_settings(raw)
    c = _Checker()
    c.violations.extend(unknown)

    g, ph, ini, tm, halo, out = (s[k] for k in ("grid", "physics", "initial", "time", "halo", "output"))
    N = c.integer(g, "[grid].N", "N")
    if N is not None and N not in (1, 2, 3):
        c.fail("[grid].N", f"dimension must be 1, 2 or 3, got {N}")
        N = None
    L = c.number(g, "[grid].L", "L", positive=True)
    n = c.integer(g, "[grid].n", "n", minimum=16)
    if n is not None and n & (n - 1):
        c.fail("[grid].n", f"must be a power of two, got {n}")

    m = c.number(ph, "[physics].m", "m", positive=True)
    nu = c.number(ph, "[physics].nu", "nu")
    if nu is not None:
        if not nu > 2:
            c.fail("[physics].nu", f"must exceed 2, got {nu}")
        if N is not None and not nu < 2 + 4 / N:
            c.fail("[physics].nu",
                   f"nu = {nu} violates the mass-subcritical bound nu < 2 + 4/N = {2 + 4 / N:g}")
    coeff = c.number(ph, "[physics].coeff", "coeff", positive=True)
    eps = c.number(ph, "[physics].epsilon", "epsilon", positive=True)
    if eps is not None and eps > 1:
        c.fail("[physics].epsilon", f"must lie in (0, 1], got {eps}")
    kind = ph["potential"]
    if kind not in PotentialSpec.KINDS:
        c.fail("[physics].potential", f"must be one of {', '.join(PotentialSpec.KINDS)}, got {kind!r}")
    stiff = c.number(ph, "[physics].stiffness", "stiffness", positive=True)
    depth = c.number(ph, "[physics].depth", "depth", positive=True)
    width = c.number(ph, "[physics].width", "width", positive=True)
    vecs = {}
    for sec, name, key in (("physics", "slope", "slope"), ("physics", "center", "center"),
                           ("initial", "qbar", "qbar"), ("initial", "pbar", "pbar"),
                           ("initial", "offset", "offset")):
        v = _vector(s[sec][key])
        path = f"[{sec}].{key}"
        if v is None:
            c.fail(path, f"expected a number or list of numbers, got {s[sec][key]!r}")
        elif N is not None and len(v) not in (1, N):
            c.fail(path, f"needs 1 or {N} components, got {len(v)}")
        elif N is not None:
            v = v * N if len(v) == 1 else v
        vecs[name] = v

    pert = ini["perturbation"]
    if pert not in ("zero", "gaussian"):
        c.fail("[initial].perturbation", f"must be 'zero' or 'gaussian', got {pert!r}")
    amp = c.number(ini, "[initial].amplitude", "amplitude")
    pw = c.number(ini, "[initial].pert_width", "pert_width", positive=True)
    M = ini["M_bound"]
    if M is not None and not _num(M):
        c.fail("[initial].M_bound", f"expected a number, got {M!r}")

    dt = c.number(tm, "[time].dt", "dt", positive=True)
    T = c.number(tm, "[time].T", "T", nonneg=True)
    if dt and T is not None and dt > 0 and T >= 0:
        k = T / dt
        if abs(k - round(k)) > 1e-9 * max(1.0, k):
            c.fail("[time].T", f"must be a whole number of steps of dt={dt}")
    stride = c.integer(tm, "[time].sample_stride", "sample_stride", minimum=1)
    ck = c.integer(tm, "[time].checkpoint_stride", "checkpoint_stride", minimum=0)

    eta = halo["eta"]
    if eta == "equal-epsilon":
        eta_val = None
    elif _num(eta) and 0 < eta < 1:
        eta_val = float(eta)
    else:
        c.fail("[halo].eta", f"must be 'equal-epsilon' or a number in (0, 1), got {eta!r}")
        eta_val = None
    over = c.integer(halo, "[halo].oversample", "oversample", minimum=1)

    if not isinstance(out["directory"], str) or not out["directory"]:
        c.fail("[output].directory", "expected a non-empty path")
    fmts = out["formats"]
    if not isinstance(fmts, list) or any(f not in FORMATS for f in fmts):
        c.fail("[output].formats", f"expected a list drawn from {', '.join(FORMATS)}, got {fmts!r}")
        fmts = []

    tol = c.number(s["ground_state"], "[ground_state].tol", "tol", positive=True)
    sweps = s["sweep"]["epsilons"]
    if not isinstance(sweps, list) or not sweps or not all(_num(e) and 0 < e <= 1 for e in sweps):
        c.fail("[sweep].epsilons", f"expected a non-empty list of numbers in (0, 1], got {sweps!r}")
    elif len(set(sweps)) != len(sweps):
        c.fail("[sweep].epsilons", "values must be distinct")
    workers = c.integer(s["sweep"], "[sweep].workers", "workers", minimum=1)

    if eps is not None and L is not None and vecs.get("qbar") is not None:
        for a, q in enumerate(vecs["qbar"]):
            if abs(q) > L / 2 - 10 * eps:
                c.fail("[initial].qbar", f"component {a} = {q} is closer than 10*epsilon to the box face")

    if c.violations:
        raise ConfigError(c.violations)

    run = RunSpec(
        dim=N, L=L, n=n, m=m, nu=nu, coeff=coeff, eps=eps,
        potential=PotentialSpec(kind, stiff, tuple(vecs["slope"]), depth, width, tuple(vecs["center"])),
        qbar=tuple(vecs["qbar"]), pbar=tuple(vecs["pbar"]),
        perturbation=PerturbationSpec(pert, amp, pw, tuple(vecs["offset"])),
        M_bound=None if M is None else float(M),
        dt=dt, T=T, sample_stride=stride, checkpoint_stride=ck, eta=eta_val,
        oversample=over, gs_tol=tol,
    )
    return RunConfig(run=run, output_dir=out["directory"], formats=tuple(fmts),
                     sweep_eps=tuple(float(e) for e in sweps), workers=workers, settings=s)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([f"{path}: cannot read ({exc.strerror})"]) from exc
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"{path}: syntax error: {exc}"]) from exc
    return validate(raw)
