"""Run configuration: one JSON document, validated by hand, no environment overrides."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields

__all__ = ["ConfigError", "Tolerances", "Sweeps", "RunConfig", "load_config"]


class ConfigError(ValueError):
    """The configuration document violates the schema."""


@dataclass(frozen=True)
class Tolerances:
    quad_tol: float = 1e-10
    kernel_step: float = 0.25
    # Coarser engine for the per-atom Riesz sweeps; its error is ~1e-7 of the singular scale.
    sweep_step: float = 0.5
    pv_order: int = 8
    pv_h_min: float = 1e-6
    # Growth factor of source panels away from the evaluation point in the sweeps.
    pv_ratio: float = 4.0
    pv_eps0: float | None = None
    richardson_order: int = 2
    spectral_K: int = 200


@dataclass(frozen=True)
class Sweeps:
    prop23_near: int = 40
    prop23_far: int = 30
    prop31_y: tuple = (0.02, 50.0, 50)
    lemma41_y0: tuple = (0.05, 20.0, 25)
    lemma41_per_ball: int = 5
    thm15_atoms: int = 100
    thm15_centers: tuple = (0.02, 20.0)
    thm211_telescope: int = 100
    thm211_functions: int = 20
    thm211_local_atoms: int = 0
    lemma34_z: tuple = (0.3, 1.0, 4.0)
    prop27_y: tuple = (0.01, 100.0, 30)


@dataclass(frozen=True)
class RunConfig:
    alpha: tuple = (1.0,)
    seed: int = 0
    out: str = "out"
    tolerances: Tolerances = field(default_factory=Tolerances)
    sweeps: Sweeps = field(default_factory=Sweeps)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)


def _positive(name, v, integer=False, allow_zero=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{name} must be a number")
    if integer and int(v) != v:
        raise ConfigError(f"{name} must be an integer")
    if v < 0 or (v == 0 and not allow_zero):
        raise ConfigError(f"{name} must be {'nonnegative' if allow_zero else 'positive'}")
    return int(v) if integer else float(v)


def _section(cls, doc, name):
    if doc is None:
        return cls()
    if not isinstance(doc, dict):
        raise ConfigError(f"{name} must be an object")
    known = {f.name: f for f in fields(cls)}
    extra = set(doc) - set(known)
    if extra:
        raise ConfigError(f"unknown keys in {name}: {sorted(extra)}")
    defaults = cls()
    out = {}
    for key, val in doc.items():
        ref = getattr(defaults, key)
        label = f"{name}.{key}"
        if isinstance(ref, tuple):
            if not isinstance(val, list) or len(val) != len(ref):
                raise ConfigError(f"{label} must be a list of {len(ref)} numbers")
            out[key] = tuple(
                _positive(label, v, integer=isinstance(r, int) and not isinstance(r, bool)) for v, r in zip(val, ref)
            )
            if len(ref) >= 2 and not out[key][0] < out[key][1]:
                raise ConfigError(f"{label}: lower end must be below upper end")
        elif ref is None:
            out[key] = None if val is None else _positive(label, val)
        else:
            # Counts of sweep items may be zero; cmd_verify decides whether that is degenerate.
            out[key] = _positive(label, val, integer=isinstance(ref, int), allow_zero=isinstance(ref, int) and cls is Sweeps)
    return cls(**out)


def load_config(doc=None):
    """RunConfig from a parsed JSON object (None gives the defaults)."""
    if doc is None:
        return RunConfig()
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    extra = set(doc) - {"alpha", "seed", "out", "tolerances", "sweeps"}
    if extra:
        raise ConfigError(f"unknown keys: {sorted(extra)}")
    kw = {}
    if "alpha" in doc:
        al = doc["alpha"]
        al = al if isinstance(al, list) else [al]
        if not al:
            raise ConfigError("alpha list is empty")
        kw["alpha"] = tuple(_positive("alpha", a) for a in al)
    if "seed" in doc:
        kw["seed"] = _positive("seed", doc["seed"], integer=True, allow_zero=True)
    if "out" in doc:
        if not isinstance(doc["out"], str) or not doc["out"]:
            raise ConfigError("out must be a nonempty string")
        kw["out"] = doc["out"]
    kw["tolerances"] = _section(Tolerances, doc.get("tolerances"), "tolerances")
    kw["sweeps"] = _section(Sweeps, doc.get("sweeps"), "sweeps")
    if kw["tolerances"].richardson_order < 1:
        raise ConfigError("tolerances.richardson_order must be at least 1")
    return RunConfig(**kw)
