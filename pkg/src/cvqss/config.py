"""Protocol configuration: JSON parsing, validation and serialization.

A configuration is one JSON document checked against the bundled schema
(``cvqss/data/config.schema.json``) and then against cross-field rules.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .cc import CCProtocol, Collaboration, MeasurementRecipe
from .cluster import ClusterGraph
from .cq import CQProtocol, DecodingSequence, Gate
from .errors import CVQSSError, ConfigError, InvalidArgumentError

GATE_FIELDS = ("weight", "theta", "gamma", "dq", "dp")


@lru_cache(maxsize=None)
def schema() -> dict:
    return json.loads(resources.files("cvqss.data").joinpath("config.schema.json").read_text())


def _path(error: jsonschema.ValidationError) -> str:
    return ".".join(str(p) for p in error.absolute_path) or "<root>"


def _recipe_from(items) -> MeasurementRecipe:
    return MeasurementRecipe(tuple((t["mode"], t["theta"], t["weight"]) for t in items))


def _recipe_to(recipe: MeasurementRecipe) -> list[dict]:
    return [{"mode": m, "theta": th, "weight": k} for m, th, k in recipe.terms]


def _gate_from(d: dict) -> Gate:
    if d["kind"] == "quadratic":
        return Gate("quadratic", (), {"terms": tuple((t["a"], t["b"], t["coeff"]) for t in d["terms"])})
    return Gate(d["kind"], tuple(d.get("modes", ())), {k: float(d[k]) for k in GATE_FIELDS if k in d})


def _gate_to(g: Gate) -> dict:
    if g.kind == "quadratic":
        return {"kind": "quadratic", "terms": [{"a": a, "b": b, "coeff": c} for a, b, c in g.params["terms"]]}
    out: dict[str, Any] = {"kind": g.kind, "modes": list(g.modes)}
    out.update({k: float(g.params[k]) for k in GATE_FIELDS if k in g.params})
    return out


@dataclass(frozen=True)
class CollaborationConfig:
    name: str
    parties: tuple[int, ...]
    recipe: MeasurementRecipe | None = None
    sequence: DecodingSequence | None = None
    local_recipes: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Sweep:
    sigma_min: float
    sigma_max: float
    steps: int
    log_scale: bool = False

    def grid(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.sigma_min])
        if self.log_scale:
            return np.geomspace(self.sigma_min, self.sigma_max, self.steps)
        return np.linspace(self.sigma_min, self.sigma_max, self.steps)


@dataclass(frozen=True)
class ProtocolConfig:
    name: str
    task: str
    modes: int
    edges: tuple[tuple[int, int, float], ...]
    sigma: float | tuple[float, ...]
    collaborations: tuple[CollaborationConfig, ...]
    dealer_mode: int | None = None
    sigma_D: float | None = None
    encodings: tuple[tuple[int, float, float], ...] = ()
    prior_Sigma: float = 1.0
    sweep: Sweep | None = None

    # -- construction ------------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict) -> "ProtocolConfig":
        errors = sorted(jsonschema.Draft202012Validator(schema()).iter_errors(data), key=lambda e: list(e.absolute_path))
        if errors:
            e = errors[0]
            raise ConfigError(f"{_path(e)}: {e.message}")
        task = data["task"]
        collabs = []
        for k, c in enumerate(data["collaborations"]):
            where = f"collaborations.{k}"
            if task == "cc":
                if "recipe" not in c:
                    raise ConfigError(f"{where}.recipe: required for task 'cc'")
                collabs.append(CollaborationConfig(c["name"], tuple(c["parties"]), recipe=_recipe_from(c["recipe"])))
            else:
                for key in ("gates", "output_mode"):
                    if key not in c:
                        raise ConfigError(f"{where}.{key}: required for task {task!r}")
                try:
                    seq = DecodingSequence(tuple(c["parties"]), tuple(_gate_from(g) for g in c["gates"]),
                                           c["output_mode"], c["name"])
                except CVQSSError as exc:
                    raise ConfigError(f"{where}.gates: {exc}") from None
                local = {q: _recipe_from(r) for q, r in c.get("local_recipes", {}).items()}
                collabs.append(CollaborationConfig(c["name"], seq.parties, sequence=seq, local_recipes=local))
        names = [c.name for c in collabs]
        if len(set(names)) != len(names):
            raise ConfigError("collaborations: duplicate collaboration names")
        sigma = data["sigma"]
        sweep = None
        if "sweep" in data:
            s = data["sweep"]
            sweep = Sweep(float(s["sigma_min"]), float(s["sigma_max"]), int(s["steps"]), bool(s.get("log_scale", False)))
            if sweep.sigma_max < sweep.sigma_min:
                raise ConfigError("sweep.sigma_max: must be >= sweep.sigma_min")
            if isinstance(sigma, list):
                raise ConfigError("sigma: a per-mode list cannot be combined with a sweep")
        cfg = cls(
            name=data["name"],
            task=task,
            modes=int(data["modes"]),
            edges=tuple((e["i"], e["j"], float(e["weight"])) for e in data["edges"]),
            sigma=tuple(float(x) for x in sigma) if isinstance(sigma, list) else float(sigma),
            collaborations=tuple(collabs),
            dealer_mode=data.get("dealer_mode"),
            sigma_D=float(data["sigma_D"]) if "sigma_D" in data else None,
            encodings=tuple((e["mode"], float(e["dq_per_s"]), float(e["dp_per_s"])) for e in data.get("encodings", ())),
            prior_Sigma=float(data.get("prior_Sigma", 1.0)),
            sweep=sweep,
        )
        cfg._check()
        return cfg

    def _check(self) -> None:
        if self.task in ("cq", "qq"):
            if self.dealer_mode is None:
                raise ConfigError(f"dealer_mode: required for task {self.task!r}")
            if self.dealer_mode >= self.modes:
                raise ConfigError(f"dealer_mode: {self.dealer_mode} out of range for {self.modes} modes")
        else:
            if not self.encodings:
                raise ConfigError("encodings: required for task 'cc'")
            if self.dealer_mode is not None or self.sigma_D is not None:
                raise ConfigError("dealer_mode: task 'cc' has no dealer mode")
        if isinstance(self.sigma, tuple) and len(self.sigma) != self.modes:
            raise ConfigError(f"sigma: expected {self.modes} per-mode values, got {len(self.sigma)}")
        try:
            self.build()
        except CVQSSError as exc:
            raise ConfigError(f"{self._blame(exc)}: {exc}") from None
        for k, c in enumerate(self.collaborations):
            bad = [m for m in c.parties if not 0 <= m < self.modes]
            if bad:
                raise ConfigError(f"collaborations.{k}.parties: modes {bad} out of range")

    @staticmethod
    def _blame(exc: Exception) -> str:
        msg = str(exc)
        for key in ("edge", "self-loop", "encoding", "squeezing", "recipe", "collaboration", "dealer"):
            if key in msg:
                return {"edge": "edges", "self-loop": "edges", "encoding": "encodings", "squeezing": "sigma",
                        "recipe": "collaborations", "collaboration": "collaborations", "dealer": "dealer_mode"}[key]
        return "<root>"

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"name": self.name, "task": self.task, "modes": self.modes}
        if self.dealer_mode is not None:
            out["dealer_mode"] = self.dealer_mode
        out["edges"] = [{"i": i, "j": j, "weight": w} for i, j, w in self.edges]
        out["sigma"] = list(self.sigma) if isinstance(self.sigma, tuple) else self.sigma
        if self.sigma_D is not None:
            out["sigma_D"] = self.sigma_D
        if self.encodings:
            out["encodings"] = [{"mode": m, "dq_per_s": dq, "dp_per_s": dp} for m, dq, dp in self.encodings]
        out["prior_Sigma"] = self.prior_Sigma
        collabs = []
        for c in self.collaborations:
            d: dict[str, Any] = {"name": c.name, "parties": list(c.parties)}
            if c.recipe is not None:
                d["recipe"] = _recipe_to(c.recipe)
            if c.sequence is not None:
                d["gates"] = [_gate_to(g) for g in c.sequence.gates]
                d["output_mode"] = c.sequence.output_mode
            if c.local_recipes:
                d["local_recipes"] = {q: _recipe_to(r) for q, r in sorted(c.local_recipes.items())}
            collabs.append(d)
        out["collaborations"] = collabs
        if self.sweep is not None:
            out["sweep"] = {"sigma_min": self.sweep.sigma_min, "sigma_max": self.sweep.sigma_max,
                            "steps": self.sweep.steps, "log_scale": self.sweep.log_scale}
        return out

    # -- domain objects ----------------------------------------------------

    def graph(self) -> ClusterGraph:
        sigmas = self.sigma if isinstance(self.sigma, tuple) else (self.sigma,) * self.modes
        return ClusterGraph(self.modes, self.edges, sigmas, self.encodings)

    def build(self) -> CCProtocol | CQProtocol:
        g = self.graph()
        if self.task == "cc":
            return CCProtocol(g, {c.name: Collaboration(c.parties, c.recipe) for c in self.collaborations},
                              self.prior_Sigma, self.name)
        return CQProtocol(g, self.dealer_mode, {c.name: c.sequence for c in self.collaborations}, self.name)

    def sigma_grid(self) -> np.ndarray | None:
        return None if self.sweep is None else self.sweep.grid()


def parse_config(text: str) -> ProtocolConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"<root>: invalid JSON ({exc})") from None
    return ProtocolConfig.from_dict(data)


def serialize_config(cfg: ProtocolConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2) + "\n"


def load_config(path: str | Path) -> ProtocolConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"--config: cannot read {path} ({exc.strerror})") from None
    return parse_config(text)


PRESETS = ("cc-23", "cc-35", "cq-23", "cq-35", "qq-23", "qq-35")


def preset_path(name: str):
    if name not in PRESETS:
        raise InvalidArgumentError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    return resources.files("cvqss.data").joinpath("presets", f"{name}.json")


def load_preset(name: str) -> ProtocolConfig:
    return parse_config(preset_path(name).read_text())
