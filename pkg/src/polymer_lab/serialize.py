"""Model configs, walk parsing and report emission (JSON and CSV)."""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction

import numpy as np

from .enumeration import EnumerationReport, kesten_partial_sum, lambda_bracket
from .errors import ModelError
from .lattice import COMPASS, StepSet, Walk, validate_step_set
from .model import DEFAULT_CAP, JumpDistribution, Model, Potential


class ConfigError(ValueError):
    """Malformed configuration or walk input (CLI exit code 2)."""


# -- model -----------------------------------------------------------------------

def _prob_value(v):
    if isinstance(v, str):
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad probability {v!r}") from exc
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"bad probability {v!r}")
    return v


def model_from_dict(d: dict) -> Model:
    """Build a model from {dimension, steps, rho: {mode, values}, phi: {mode, k, values, cap}}.

    Missing steps mean nearest-neighbour steps. Probabilities given as
    integers or strings like "1/4" keep exact rational arithmetic.
    """
    if not isinstance(d, dict):
        raise ConfigError("model config must be an object")
    dim = int(d.get("dimension", 2))
    if "steps" in d and d["steps"] is not None:
        ss = validate_step_set(d["steps"])
        if ss.dimension != dim:
            raise ModelError(f"steps have dimension {ss.dimension}, config says {dim}")
    else:
        ss = StepSet.nearest_neighbor(dim)
    rho_cfg = d.get("rho") or {"mode": "uniform"}
    mode = rho_cfg.get("mode", "uniform")
    if mode == "uniform":
        rho = JumpDistribution.uniform(ss)
    elif mode == "explicit":
        values = rho_cfg.get("values")
        if not isinstance(values, list):
            raise ConfigError("explicit rho needs a list of values")
        rho = JumpDistribution.explicit(ss, [_prob_value(v) for v in values])
    else:
        raise ConfigError(f"unknown rho mode {mode!r}")
    phi_cfg = d.get("phi") or {"mode": "free"}
    pm = phi_cfg.get("mode", "free")
    cap = int(phi_cfg.get("cap", DEFAULT_CAP))
    if pm == "free":
        phi = Potential.free(cap)
    elif pm == "saw":
        phi = Potential.saw(cap)
    elif pm == "weak":
        if "k" not in phi_cfg:
            raise ConfigError("weak potential needs k")
        phi = Potential.weak(float(phi_cfg["k"]), cap)
    elif pm == "table":
        values = phi_cfg.get("values")
        if not isinstance(values, list):
            raise ConfigError("table potential needs a list of values")
        phi = Potential.from_table(values)
    else:
        raise ConfigError(f"unknown phi mode {pm!r}")
    return Model(ss, rho, phi)


def model_to_dict(model: Model) -> dict:
    steps = [list(s) for s in model.step_set.steps]
    if model.rho.numerators is not None and model.rho.numerators == (1,) * len(steps):
        rho = {"mode": "uniform"}
    elif model.rho.numerators is not None:
        rho = {"mode": "explicit",
               "values": [str(Fraction(n, model.rho.denominator)) for n in model.rho.numerators]}
    else:
        rho = {"mode": "explicit", "values": list(model.rho.probabilities)}
    phi = {"mode": model.phi.kind, "cap": model.phi.cap}
    if model.phi.kind == "weak":
        phi["k"] = model.phi.k
    if model.phi.kind == "table":
        phi["values"] = [None if v == math.inf else v for v in model.phi.values]
    return {"dimension": model.dimension, "steps": steps, "rho": rho, "phi": phi}


# -- walks -------------------------------------------------------------------------

def parse_walk(text, step_set: StepSet | None = None) -> Walk:
    """A walk from a JSON point list (or already decoded list) or a compass string.

    Compass letters are only accepted in d = 2 when the step set contains
    the four unit steps.
    """
    if isinstance(text, str):
        s = text.strip()
        if s.startswith("["):
            try:
                text = json.loads(s)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"walk is not valid JSON: {exc}") from exc
        else:
            if step_set is not None and not all(v in step_set for v in COMPASS.values()):
                raise ConfigError("compass strings need the four unit steps in the step set")
            try:
                return Walk.from_compass(s)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
    try:
        w = Walk(np.array(text, dtype=np.int64))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad walk: {exc}") from exc
    if step_set is not None and not w.is_walk_of(step_set):
        raise ConfigError("walk uses steps outside the model's step set")
    return w


# -- numbers -------------------------------------------------------------------------

def fmt(v) -> str:
    """17 significant digits: every float64 round-trips."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def plain(obj):
    """Convert numpy scalars/arrays and tuples to JSON-ready Python values."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        # strict JSON has no NaN/inf; undefined values become null, infinities strings
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, Walk):
        return obj.to_list()
    return obj


def dumps(obj) -> str:
    return json.dumps(plain(obj), indent=1, sort_keys=True, allow_nan=False) + "\n"


def table_csv(columns: list[str], rows: list[list], header_comment: str | None = None) -> str:
    buf = io.StringIO()
    if header_comment is not None:
        buf.write(f"# config: {header_comment}\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(columns)
    for r in rows:
        wr.writerow([fmt(v) if isinstance(v, (int, float, np.integer, np.floating)) else v for v in r])
    return buf.getvalue()


# -- enumeration reports ----------------------------------------------------------------

ENUM_COLUMNS = ["n", "Z", "H", "Zplus", "iB_mass", "lower_trace", "upper_trace"]


def enumeration_rows(rep: EnumerationReport) -> list[list]:
    n_max = rep.N
    lo = [math.nan] + [float(v) for v in np.log(rep.H[1:]) / np.arange(1, n_max + 1)] if np.all(rep.H[1:] > 0) \
        else [math.nan] * (n_max + 1)
    with np.errstate(divide="ignore"):
        up = [math.nan] + [float(v) for v in np.log(rep.Z[1:]) / np.arange(1, n_max + 1)]
    return [[n, float(rep.Z[n]), float(rep.H[n]), float(rep.Zplus[n]), float(rep.iB_mass[n]), lo[n], up[n]]
            for n in range(n_max + 1)]


def enumeration_result(rep: EnumerationReport) -> dict:
    rows = enumeration_rows(rep)
    out = {
        "records": [dict(zip(ENUM_COLUMNS, r)) for r in rows],
        "partial": rep.partial,
        "nodes": rep.nodes,
    }
    if not rep.partial and rep.N >= 2 and np.all(rep.H[1:] > 0):
        br = lambda_bracket(rep)
        out["bracket"] = {"lower": br.lower, "upper": br.upper}
        out["kesten_S_at_upper"] = kesten_partial_sum(rep, br.upper)
        out["lse_agreement"] = rep.lse_agreement()
    if rep.exact is not None:
        out["exact_weights"] = {"denominator_per_step": rep.model.rho.denominator, **rep.exact}
    for r, rec in zip(range(rep.N + 1), out["records"]):
        rec["H_nh"] = [float(v) for v in rep.H_nh[r]]
    return out
