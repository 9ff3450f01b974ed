"""Plain ``key = value`` scenario files and their translation into model objects."""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from .hiring import BLIND, PARITY, STATDISC, HiringRegime
from .market import (
    BetaAbility,
    EffortCost,
    FunctionalForms,
    InvestCost,
    ModelError,
    ModelParams,
    QualProb,
    UniformAbility,
    WageCurve,
    validate_params,
)


class ConfigError(ModelError, ValueError):
    pass


_FORM_KEYS = {
    "form.ability.kind": str,
    "form.ability.lo": float,
    "form.ability.hi": float,
    "form.ability.a": float,
    "form.ability.b": float,
    "form.invest.beta": float,
    "form.invest.theta0": float,
    "form.qual.a": float,
    "form.effort.k_Q": float,
    "form.effort.k_U": float,
    "form.effort.theta0": float,
    "form.wage.s": float,
    "form.wage.pinned": "bool",
}
_REGIME_KEYS = {
    "regime": str,
    "regime.xi_B": float,
    "regime.xi_W": float,
    "regime.signal_noise": float,
    "regime.cutoff": "optfloat",
    "regime.prior_dynamics": str,
}
_RUN_KEYS = {
    "init.pi_B": float,
    "init.pi_W": float,
    "init.g_B": "optfloat",
    "init.g_W": "optfloat",
    "run.steps": int,
    "run.tol": float,
    "run.max_t": int,
    "run.seed": int,
    "abm.n": int,
    "abm.effort_policy": str,
    "abm.event_log": "bool",
    "abm.wage_schedule": str,
}

DEFAULTS = {
    "form.ability.kind": "uniform",
    "form.ability.lo": 0.0,
    "form.ability.hi": 1.0,
    "form.ability.a": 2.0,
    "form.ability.b": 2.0,
    "form.invest.beta": 1.0,
    "form.invest.theta0": 0.1,
    "form.qual.a": 2.0,
    "form.effort.k_Q": 0.2,
    "form.effort.k_U": 0.45,
    "form.effort.theta0": 0.1,
    "form.wage.s": 1.0,
    "form.wage.pinned": False,
    "regime": PARITY,
    "regime.xi_B": 0.3,
    "regime.xi_W": 0.7,
    "regime.signal_noise": 0.05,
    "regime.cutoff": None,
    "regime.prior_dynamics": "reputation",
    "init.pi_B": 0.1,
    "init.pi_W": 0.1,
    "init.g_B": None,
    "init.g_W": None,
    "run.steps": 200,
    "run.tol": 1e-8,
    "run.max_t": 100_000,
    "run.seed": 0,
    "abm.n": 10_000,
    "abm.effort_policy": "stationary",
    "abm.event_log": False,
    "abm.wage_schedule": "random",
}


def _key_types():
    # ModelParams annotations are strings under postponed evaluation
    out = {f.name: {"float": float, "int": int, "str": str}[str(f.type)] for f in fields(ModelParams)}
    out.update(_FORM_KEYS)
    out.update(_REGIME_KEYS)
    out.update(_RUN_KEYS)
    return out


KEY_TYPES = _key_types()
for _f in fields(ModelParams):
    DEFAULTS[_f.name] = _f.default


def _coerce(key, raw, kind):
    raw = raw.strip()
    try:
        if kind == "bool":
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind == "optfloat":
            return None if raw.lower() in ("none", "auto", "") else float(raw)
        if kind is int:
            v = float(raw)
            if v != int(v):
                raise ValueError(raw)
            return int(v)
        return kind(raw)
    except ValueError:
        name = kind if isinstance(kind, str) else kind.__name__
        raise ConfigError(f"{key}: cannot read {raw!r} as {name}") from None


def parse_text(text: str, source: str = "<string>") -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment. Unknown keys are errors."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {body!r}")
        key, raw = (s.strip() for s in body.split("=", 1))
        if key not in KEY_TYPES:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _coerce(key, raw, KEY_TYPES[key])
        except ConfigError as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from None
    return out


def parse_file(path) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from None
    return parse_text(text, str(path))


def parse_override(item: str) -> tuple[str, object]:
    """One ``--set key=value`` item."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not key=value")
    key, raw = (s.strip() for s in item.split("=", 1))
    if key not in KEY_TYPES:
        raise ConfigError(f"override: unknown key {key!r}")
    return key, _coerce(key, raw, KEY_TYPES[key])


@dataclass(frozen=True)
class Scenario:
    params: ModelParams
    forms: FunctionalForms
    regime: HiringRegime
    values: dict = field(default_factory=dict)  # effective key/value map, defaults filled in

    @property
    def pi0(self):
        return self.values["init.pi_B"], self.values["init.pi_W"]

    @property
    def g0(self):
        return self.values["init.g_B"], self.values["init.g_W"]

    def get(self, key):
        return self.values[key]

    def with_regime(self, tag: str) -> "Scenario":
        vals = dict(self.values, regime=tag)
        return build(vals)


def build(values: dict) -> Scenario:
    """Model objects from a (possibly partial) key/value map."""
    v = dict(DEFAULTS)
    v.update(values)
    unknown = set(v) - set(KEY_TYPES)
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}")
    try:
        params = ModelParams(**{f.name: v[f.name] for f in fields(ModelParams)})
        validate_params(params)
        kind = v["form.ability.kind"]
        if kind == "uniform":
            if not v["form.ability.hi"] > v["form.ability.lo"]:
                raise ConfigError("form.ability.hi must exceed form.ability.lo")
            ability = UniformAbility(v["form.ability.lo"], v["form.ability.hi"])
        elif kind == "beta":
            if not (v["form.ability.a"] > 0 and v["form.ability.b"] > 0):
                raise ConfigError("beta ability needs a > 0 and b > 0")
            ability = BetaAbility(v["form.ability.a"], v["form.ability.b"])
        else:
            raise ConfigError(f"form.ability.kind={kind!r} not in (uniform, beta)")
        forms = FunctionalForms(
            ability=ability,
            invest_cost=InvestCost(v["form.invest.beta"], v["form.invest.theta0"]),
            qual_prob=QualProb(v["form.qual.a"]),
            effort_cost=EffortCost(v["form.effort.k_Q"], v["form.effort.k_U"], v["form.effort.theta0"]),
            wage_curve=WageCurve(params.w_max, params.w_min, v["form.wage.s"], v["form.wage.pinned"]),
        )
        if v["regime"] not in (PARITY, BLIND, STATDISC):
            raise ConfigError(f"regime={v['regime']!r} not in (parity, blind, statdisc)")
        regime = HiringRegime(
            v["regime"],
            xi_B=v["regime.xi_B"],
            xi_W=v["regime.xi_W"],
            signal_noise=v["regime.signal_noise"],
            cutoff=v["regime.cutoff"],
            prior_dynamics=v["regime.prior_dynamics"],
        )
        for key in ("init.pi_B", "init.pi_W"):
            if not 0.0 <= v[key] <= 1.0:
                raise ConfigError(f"{key}={v[key]} must lie in [0, 1]")
        if v["abm.effort_policy"] not in ("stationary", "dp"):
            raise ConfigError(f"abm.effort_policy={v['abm.effort_policy']!r} not in (stationary, dp)")
        if v["abm.wage_schedule"] not in ("random", "periodic"):
            raise ConfigError(f"abm.wage_schedule={v['abm.wage_schedule']!r} not in (random, periodic)")
    except ConfigError:
        raise
    except (ModelError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    return Scenario(params, forms, regime, v)


def load(path=None, overrides=()) -> Scenario:
    """Scenario from an optional file plus ``key=value`` overrides applied in order."""
    values = parse_file(path) if path is not None else {}
    for item in overrides:
        key, val = parse_override(item) if isinstance(item, str) else item
        values[key] = val
    return build(values)


def with_values(scn: Scenario, **changes) -> Scenario:
    return build(dict(scn.values, **changes))


def dump(values: dict) -> str:
    """Effective configuration in the same ``key = value`` format, keys sorted."""
    lines = []
    for key in sorted(values):
        val = values[key]
        if val is None:
            val = "none"
        elif isinstance(val, bool):
            val = "true" if val else "false"
        lines.append(f"{key} = {val}")
    return "\n".join(lines) + "\n"

