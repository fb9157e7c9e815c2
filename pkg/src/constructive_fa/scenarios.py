"""Scenario files: parsing, validation and execution.

A scenario is one JSON object with a ``kind`` and a kind-specific block.
:func:`load_scenario` checks it and resolves every recipe into concrete
objects; :func:`run_scenario` executes it and writes the reports into an
output directory.  Nothing depends on the environment or the clock, so two
runs produce identical files.

Integer expressions such as ``"2n"`` or ``"4^n"`` are allowed wherever a
per-index quantity is expected.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import extraction, hump, operators, selection
from .errors import CertificateError, ScenarioError
from .operators import QuotientClass, dipole_probe
from .serialize import (
    emit_report,
    extraction_to_record,
    finite_fn_from_record,
    grid_from_record,
    load_json,
    report_float,
)
from .spaces import DirectSumVec, FiniteFn, GridFunction

KINDS = {
    "ubp-witness": "gliding-hump divergence point and certificate for an operator family",
    "weak-ubp": "hump witness for real functionals from averaged near-maximisers",
    "aa-extract": "sup-norm Cauchy subsequence of an equicontinuous grid family",
    "fk-extract": "L^p Cauchy subsequence via mollification and nested extraction",
    "choose-finite": "finite subsets from a witness with nonzero integrals",
    "choose-asymptotic": "argmax subsets with cardinality bounded by C * lambda_n",
    "choose-singleton": "one element per set by strict descent through quotient classes",
}

DEFAULT_FORMAT = {"ubp-witness": "csv", "weak-ubp": "csv"}

_AFFINE = re.compile(r"(?:(?P<coef>[0-9.]+)\s*\*?\s*)?n\s*(?:(?P<sign>[+-])\s*(?P<const>[0-9.]+))?")
_POWER = re.compile(r"(?P<base>[0-9.]+)\s*\^\s*n")
_RECIP = re.compile(r"(?P<num>[0-9.]+)\s*/\s*n")


def _num(text):
    v = float(text)
    return int(v) if v.is_integer() else v


def index_rule(entry, name="value"):
    """``n -> value`` from a number, a 1-based list or an expression in ``n``.

    Expressions: ``"n"``, ``"2n"``, ``"n+1"``, ``"0.5*n"``, ``"4^n"``, ``"1/n"``.
    """
    if isinstance(entry, bool):
        raise ScenarioError(f"{name}: booleans are not numbers")
    if isinstance(entry, (int, float)):
        return lambda n: entry
    if isinstance(entry, list):
        values = list(entry)

        def lookup(n):
            if not 1 <= n <= len(values):
                raise ScenarioError(f"{name}: no entry for index {n} (list has {len(values)})")
            return values[n - 1]

        return lookup
    if isinstance(entry, str):
        text = entry.strip()
        m = _POWER.fullmatch(text)
        if m:
            base = float(m.group("base"))
            return lambda n: base**n
        m = _RECIP.fullmatch(text)
        if m:
            num = float(m.group("num"))
            return lambda n: num / n
        m = _AFFINE.fullmatch(text)
        if m:
            coef = _num(m.group("coef")) if m.group("coef") else 1
            const = _num(m.group("const")) if m.group("const") else 0
            if m.group("sign") == "-":
                const = -const
            return lambda n: coef * n + const
    raise ScenarioError(f"{name}: cannot interpret {entry!r}")


def _require(block, key, kind):
    if key not in block:
        raise ScenarioError(f"{kind}: missing required field {key!r}")
    return block[key]


def _positive_int(value, name):
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ScenarioError(f"{name} must be an integer >= 1, got {value!r}")
    return value


def _exponent(value, name="p"):
    if value in ("inf", "infinity"):
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value < 1:
        raise ScenarioError(f"{name} must be a number >= 1 or 'inf', got {value!r}")
    return float(value)


def _schedule(values, name="eps"):
    if not isinstance(values, list) or not values:
        raise ScenarioError(f"{name} must be a nonempty list")
    try:
        vals = [float(v) for v in values]
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{name}: {exc}") from None
    if any(not v > 0 for v in vals) or any(b >= a for a, b in zip(vals, vals[1:])):
        raise ScenarioError(f"{name} must be positive and strictly decreasing")
    return vals


# ---------------------------------------------------------------------------
# sets and witnesses
# ---------------------------------------------------------------------------


def resolve_sets(entry, horizon=None):
    """List of label tuples: explicit lists, or ``{"size": expr, "horizon": N}`` giving ``1..size(n)``."""
    if isinstance(entry, list):
        if not entry or not all(isinstance(s, list) and s for s in entry):
            raise ScenarioError("sets must be a nonempty list of nonempty label lists")
        for s in entry:
            if len(set(map(repr, s))) != len(s):
                raise ScenarioError(f"set {s} has repeated labels")
        return [tuple(s) for s in entry]
    if isinstance(entry, dict):
        size = index_rule(_require(entry, "size", "sets"), "sets.size")
        n_max = _positive_int(entry.get("horizon", horizon), "sets.horizon")
        out = []
        for n in range(1, n_max + 1):
            k = size(n)
            if float(k) != int(k) or int(k) < 1:
                raise ScenarioError(f"sets.size({n}) = {k} is not a positive integer")
            out.append(tuple(range(1, int(k) + 1)))
        return out
    raise ScenarioError("sets must be a list of label lists or a generator object")


WITNESS_RECIPES = ("indicator-first", "indicator-last", "ramp", "zero", "uniform-first")


def _recipe_values(recipe, labels, n, block):
    k = len(labels)
    if recipe == "indicator-first":
        return [1.0] + [0.0] * (k - 1)
    if recipe == "indicator-last":
        return [0.0] * (k - 1) + [1.0]
    if recipe == "ramp":
        return [float(i + 1) for i in range(k)]
    if recipe == "zero":
        return [0.0] * k
    if recipe == "uniform-first":
        count = int(index_rule(block.get("count", "n"), "witness.count")(n))
        height = float(index_rule(block.get("height", "1/n"), "witness.height")(n))
        if not 0 <= count <= k:
            raise ScenarioError(f"witness.count({n}) = {count} does not fit S_{n}")
        return [height] * count + [0.0] * (k - count)
    raise ScenarioError(f"unknown witness recipe {recipe!r}; known: {', '.join(WITNESS_RECIPES)}")


def resolve_witness(entry, sets):
    """``DirectSumVec`` of ``FiniteFn`` components on the given sets.

    ``entry`` is a recipe name, ``{"recipe": name, ...}`` or
    ``{"components": {"n": [[label, value], ...]}}``.
    """
    if isinstance(entry, str):
        entry = {"recipe": entry}
    if not isinstance(entry, dict):
        raise ScenarioError("witness must be a recipe name or an object")
    if "components" in entry:
        comps = {}
        for key, pairs in entry["components"].items():
            n = int(key)
            if not 1 <= n <= len(sets):
                raise ScenarioError(f"witness component {n} has no matching set")
            fn = finite_fn_from_record(pairs)
            if set(fn.domain) != set(sets[n - 1]):
                raise ScenarioError(f"witness component {n} is not defined on exactly S_{n}")
            comps[n] = fn
        return DirectSumVec(comps)
    recipe = _require(entry, "recipe", "witness")
    comps = {n: FiniteFn(labels, _recipe_values(recipe, labels, n, entry))
             for n, labels in enumerate(sets, start=1)}
    return DirectSumVec(comps)


ORACLES = ("indicator-last", "indicator-first", "ramp")


def resolve_oracle(name):
    """Class-valued oracle ``T -> [w]`` in ``U_T / constants`` built from a recipe."""
    if name not in ORACLES:
        raise ScenarioError(f"unknown oracle {name!r}; known: {', '.join(ORACLES)}")

    def oracle(labels):
        k = len(labels)
        vals = _recipe_values(name, labels, 0, {})
        if k > 1 and len(set(vals)) == 1:
            vals = [0.0] * (k - 1) + [1.0]
        return QuotientClass(labels, np.array(vals, dtype=float))

    return oracle


# ---------------------------------------------------------------------------
# operator families
# ---------------------------------------------------------------------------


def resolve_family(entry, horizon):
    """Operator family from ``{variant, scale, spaces | space, lambda | weights, p}``."""
    if not isinstance(entry, dict):
        raise ScenarioError("family must be an object")
    variant = _require(entry, "variant", "family")
    p = _exponent(entry.get("p", 1 if variant != "scaling" else "inf"))
    if variant == "diagonal":
        weights = entry.get("weights")
        rule = None if weights is None else index_rule(weights, "family.weights")
        return operators.diagonal_family(rule, p=p)
    if "space" in entry:
        space = entry["space"]
        if not isinstance(space, list) or not space:
            raise ScenarioError("family.space must be a nonempty label list")
        spaces = [tuple(space)] * horizon
    else:
        spaces = resolve_sets(_require(entry, "spaces", "family"), horizon)
    if variant == "integration":
        return operators.integration_family(spaces, p=p)
    if variant == "scaling":
        lam = index_rule(_require(entry, "lambda", "family"), "family.lambda")
        return operators.scaling_family(spaces, lam, p=p)
    if variant == "quotient":
        return operators.quotient_family(spaces, p=p)
    raise ScenarioError(f"unknown family variant {variant!r}")


def _hump_probe(fam, n):
    if fam.variant == "quotient":
        return dipole_probe(fam, n)
    return fam.default_probe(n)[0]


# ---------------------------------------------------------------------------
# grid families
# ---------------------------------------------------------------------------

GRID_RECIPES = ("phase-sine", "translate-indicator", "smooth-translate", "x-over-k")


def _cells(block, default):
    return _positive_int(block.get("cells", default), "family.cells")


def resolve_grid_family(entry, base_dir: Path):
    """List of :class:`GridFunction` from a recipe or from grid record files."""
    if not isinstance(entry, dict):
        raise ScenarioError("family must be an object")
    if "files" in entry:
        out = []
        for name in entry["files"]:
            path = (base_dir / name) if not Path(name).is_absolute() else Path(name)
            if not path.is_file():
                raise FileNotFoundError(f"grid file not found: {path}")
            try:
                out.append(grid_from_record(load_json(path)))
            except (KeyError, TypeError, ValueError) as exc:
                raise ScenarioError(f"{path}: {exc}") from None
        if not out:
            raise ScenarioError("family.files is empty")
        return out
    recipe = _require(entry, "recipe", "family")
    count = _positive_int(entry.get("count", 20), "family.count")
    ks = range(1, count + 1)
    if recipe == "phase-sine":
        phases = [float(c) for c in entry.get("phases", [0.0, math.pi])]
        lo, hi = float(entry.get("lower", 0.0)), float(entry.get("upper", 2 * math.pi))
        cells = _cells(entry, 512)
        return [GridFunction.sample(lambda x, c=phases[(k - 1) % len(phases)]: np.sin(x + c),
                                    [lo], [hi], [cells]) for k in ks]
    if recipe == "translate-indicator":
        offsets = [float(a) for a in entry.get("offsets", [0.0, 0.3])]
        width = float(entry.get("width", 0.5))
        lo, hi = float(entry.get("lower", 0.0)), float(entry.get("upper", 2.0))
        cells = _cells(entry, 1024)
        return [GridFunction.sample(
            lambda x, a=offsets[(k - 1) % len(offsets)]: ((x >= a) & (x <= a + width)).astype(float),
            [lo], [hi], [cells]) for k in ks]
    if recipe == "smooth-translate":
        center, radius = float(entry.get("center", 1.0)), float(entry.get("radius", 0.5))
        lo, hi = float(entry.get("lower", 0.0)), float(entry.get("upper", 3.0))
        cells = _cells(entry, 1536)
        return [GridFunction.sample(lambda x, k=k: smooth_bump(x - 1.0 / k, center, radius),
                                    [lo], [hi], [cells]) for k in ks]
    if recipe == "x-over-k":
        lo, hi = float(entry.get("lower", 0.0)), float(entry.get("upper", 1.0))
        cells = _cells(entry, 256)
        return [GridFunction.sample(lambda x, k=k: x / k, [lo], [hi], [cells]) for k in ks]
    raise ScenarioError(f"unknown grid recipe {recipe!r}; known: {', '.join(GRID_RECIPES)}")


def smooth_bump(x, center=1.0, radius=0.5):
    """``cos^2(pi (x - c) / (2 r))`` on ``|x - c| < r``; total variation 2."""
    t = (np.asarray(x, dtype=float) - center) / radius
    return np.where(np.abs(t) < 1, np.cos(0.5 * np.pi * t) ** 2, 0.0)


# ---------------------------------------------------------------------------
# scenario object
# ---------------------------------------------------------------------------


@dataclass
class Scenario:
    kind: str
    params: dict
    base_dir: Path = field(default_factory=Path)
    outputs: dict = field(default_factory=dict)
    resolved: dict = field(default_factory=dict)


def load_scenario(path) -> Scenario:
    """Parse and validate a scenario file, resolving all recipes and files.

    Raises ``FileNotFoundError`` for missing files, ``ValueError`` (including
    JSON errors) or :class:`ScenarioError` for malformed content.
    """
    path = Path(path)
    data = load_json(path)
    return build_scenario(data, path.parent)


def build_scenario(data, base_dir=".") -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    kind = _require(data, "kind", "scenario")
    if kind not in KINDS:
        raise ScenarioError(f"unknown kind {kind!r}; known: {', '.join(KINDS)}")
    outputs = data.get("outputs", {})
    if not isinstance(outputs, dict) or not all(isinstance(v, str) for v in outputs.values()):
        raise ScenarioError("outputs must map report names to file names")
    s = Scenario(kind, data, Path(base_dir), dict(outputs))
    _RESOLVERS[kind](s)
    return s


def _resolve_hump(s: Scenario):
    horizon = _positive_int(_require(s.params, "horizon", s.kind), "horizon")
    fam = resolve_family(_require(s.params, "family", s.kind), horizon)
    s.resolved.update(horizon=horizon, family=fam)
    if s.kind == "weak-ubp":
        if not fam.scalar_output:
            raise ScenarioError("weak-ubp needs a family of real-valued functionals")
        s.resolved["search_limit"] = _positive_int(s.params.get("search_limit", 10_000), "search_limit")
        s.resolved["candidates"] = s.params.get("candidates", "all-indicators")
        if s.resolved["candidates"] not in ("all-indicators", "first-indicator"):
            raise ScenarioError("candidates must be 'all-indicators' or 'first-indicator'")


def _resolve_aa(s: Scenario):
    s.resolved["family"] = resolve_grid_family(_require(s.params, "family", s.kind), s.base_dir)
    s.resolved["eps"] = _schedule(_require(s.params, "eps", s.kind))
    lip = s.params.get("lipschitz")
    if lip is not None and (isinstance(lip, bool) or not isinstance(lip, (int, float)) or lip < 0):
        raise ScenarioError("lipschitz must be a nonnegative number")
    s.resolved["lipschitz"] = lip


def _resolve_fk(s: Scenario):
    s.resolved["family"] = resolve_grid_family(_require(s.params, "family", s.kind), s.base_dir)
    p = _exponent(s.params.get("p", 1))
    if math.isinf(p):
        raise ScenarioError("fk-extract needs a finite p")
    eps = s.params.get("eps")
    if isinstance(eps, bool) or not isinstance(eps, (int, float)) or not eps > 0:
        raise ScenarioError("eps must be a positive number")
    moll = _require(s.params, "mollifiers", s.kind)
    if not isinstance(moll, list) or not moll or not all(
        isinstance(m, int) and not isinstance(m, bool) and m >= 1 for m in moll
    ):
        raise ScenarioError("mollifiers must be a nonempty list of integers >= 1")
    s.resolved.update(p=p, eps=float(eps), mollifiers=moll)


def _resolve_choose(s: Scenario):
    sets = resolve_sets(_require(s.params, "sets", s.kind), s.params.get("horizon"))
    s.resolved["sets"] = sets
    if s.kind == "choose-singleton":
        s.resolved["oracle"] = resolve_oracle(s.params.get("oracle", "ramp"))
        bound = s.params.get("bound")
        if bound is not None:
            bound = _positive_int(bound, "bound")
        s.resolved["bound"] = bound
        return
    s.resolved["witness"] = resolve_witness(_require(s.params, "witness", s.kind), sets)
    if s.kind == "choose-asymptotic":
        s.resolved["lambda"] = index_rule(_require(s.params, "lambda", s.kind), "lambda")


_RESOLVERS = {
    "ubp-witness": _resolve_hump,
    "weak-ubp": _resolve_hump,
    "aa-extract": _resolve_aa,
    "fk-extract": _resolve_fk,
    "choose-finite": _resolve_choose,
    "choose-asymptotic": _resolve_choose,
    "choose-singleton": _resolve_choose,
}


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------


@dataclass
class RunOutcome:
    """Files written and the one-line summary of a successful run."""

    files: list
    summary: str


def _out(s: Scenario, name, default, fmt, out_dir: Path):
    ext = ".csv" if fmt == "csv" else ".json"
    return out_dir / s.outputs.get(name, default + ext)


def _run_hump(s: Scenario, out_dir: Path, fmt: str):
    fam, horizon = s.resolved["family"], s.resolved["horizon"]
    if s.kind == "ubp-witness":
        xs = [_hump_probe(fam, n) for n in range(1, horizon + 1)]
        probes = xs if fam.variant == "quotient" else None
        inp = hump.HumpInput(fam, horizon, xs, bound_probes=probes)
    else:
        def candidates(n, a):
            x0, _, _ = fam.default_probe(a)
            if s.resolved["candidates"] == "first-indicator" or fam.spaces is None:
                return [x0]
            labels = tuple(fam.spaces(a))
            return [DirectSumVec.single(a, FiniteFn.indicator(labels, lab), p=fam.p, inner_p=fam.inner_p)
                    for lab in labels]

        inp = hump.weak_ubp_input(fam, horizon, candidates, s.resolved["search_limit"])
    trace = hump.hump_sequence(inp)
    hump.verify_trace(trace, inp)
    rows = hump.divergence_certificate(trace, inp, raise_on_fail=False)
    meta = {"kind": s.kind, "family": fam.descriptor, "horizon": horizon,
            "operator_indices": list(inp.operator_indices),
            "signs": list(trace.signs), "truncation_error": report_float(trace.truncation_error)}
    path = emit_report(rows, _out(s, "certificate", "certificate", fmt, out_dir), fmt, meta)
    failed = [r for r in rows if not r.passed]
    if failed:
        r = failed[0]
        raise CertificateError(
            f"n={r.n}: ||T_n(y)|| = {r.observed:.12g} < (1/6) 3^-n b_n = {r.required:.12g}",
            n=r.n, detail=[str(path)],
        )
    return RunOutcome([path], f"{horizon} certificate rows passed")


def _run_aa(s: Scenario, out_dir: Path, fmt: str):
    lip = s.resolved["lipschitz"]
    modulus = None if lip is None else (lambda d, _l=float(lip): _l * d)
    res = extraction.aa_extract(s.resolved["family"], eps_schedule=s.resolved["eps"], modulus=modulus)
    return _write_extraction(s, res, out_dir, fmt, {
        "modulus_source": res.info["modulus_source"],
        "deltas": [report_float(d) for d in res.info["deltas"]],
        "covering_indices": res.info["covering_indices"],
    })


def _run_fk(s: Scenario, out_dir: Path, fmt: str):
    res = extraction.fk_extract(s.resolved["family"], s.resolved["p"], s.resolved["mollifiers"],
                                s.resolved["eps"])
    return _write_extraction(s, res, out_dir, fmt, {
        "J": res.info["J"],
        "mollifiers": res.info["mollifiers"],
        "smoothing_bounds": [report_float(b) for b in res.info["smoothing_bounds"]],
    })


def _write_extraction(s, res, out_dir, fmt, extra):
    meta = {"kind": s.kind, **extra}
    files = [emit_report(res, _out(s, "extraction", "extraction", fmt, out_dir), fmt, meta)]
    if fmt == "csv":
        record = {**meta, **extraction_to_record(res)}
        record.pop("cauchy")
        files.append(emit_report(record, _out(s, "stages", "stages", "text", out_dir), "text"))
    return RunOutcome(files, f"subsequence of length {len(res.subsequence)} certified")


def _run_choose(s: Scenario, out_dir: Path, fmt: str):
    sets = s.resolved["sets"]
    if s.kind == "choose-singleton":
        oracle, bound = s.resolved["oracle"], s.resolved["bound"]
        paths = [selection.descent_path(labels, oracle, bound) for labels in sets]
        rec = {
            "kind": s.kind,
            "choices": {str(n): path[-1][0] for n, path in enumerate(paths, start=1)},
            "steps": {str(n): len(path) - 1 for n, path in enumerate(paths, start=1)},
            "paths": {str(n): [list(t) for t in path] for n, path in enumerate(paths, start=1)},
        }
        path = emit_report(rec, _out(s, "selection", "selection", "text", out_dir), "text")
        return RunOutcome([path], f"{len(sets)} singletons chosen")
    witness = s.resolved["witness"]
    if s.kind == "choose-finite":
        rep = selection.partial_cmc_demo(sets, witness)
    else:
        rep = selection.asymptotic_choice_demo(sets, s.resolved["lambda"], witness)
    path = emit_report(rep, _out(s, "selection", "selection", fmt, out_dir), fmt)
    return RunOutcome([path], f"{len(rep.indices)} indices selected")


_RUNNERS = {
    "ubp-witness": _run_hump,
    "weak-ubp": _run_hump,
    "aa-extract": _run_aa,
    "fk-extract": _run_fk,
    "choose-finite": _run_choose,
    "choose-asymptotic": _run_choose,
    "choose-singleton": _run_choose,
}


def run_scenario(s: Scenario, out_dir=".", fmt=None) -> RunOutcome:
    """Execute a loaded scenario; reports go to ``out_dir``.

    Raises :class:`EmptySelectionError` or :class:`CertificateError` when the
    scenario's claim fails; reports written before the failure are kept.
    """
    fmt = fmt or DEFAULT_FORMAT.get(s.kind, "text")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return _RUNNERS[s.kind](s, out_dir, fmt)
