"""Run-configuration schema (YAML) and its validation."""

from __future__ import annotations

import difflib
import json
from typing import Annotated, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .models import Heisenberg2D, Hubbard, TFIM, bell_pair_initial_state, plus_state


class ConfigError(ValueError):
    """All problems found in a config, each as ``(path, message)``."""

    def __init__(self, problems: list[tuple[str, str]]):
        self.problems = problems
        super().__init__("\n".join(f"{path}: {msg}" for path, msg in problems))


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


Pair = tuple[int, int]


class _ModelBase(_Block):
    boundary: Optional[Literal["open", "periodic"]] = None
    initial_state: Literal["default", "bell", "plus"] = "default"
    bell_pairing: Optional[list[Pair]] = None


class TFIMBlock(_ModelBase):
    kind: Literal["tfim"]
    size: int = Field(ge=2, le=64)
    J: float = 1.0
    gamma: float = 1.0

    def build(self) -> TFIM:
        return TFIM(self.size, self.J, self.gamma, self.boundary or "open")


class HeisenbergBlock(_ModelBase):
    kind: Literal["heisenberg"]
    size: int = Field(ge=2, le=8, description="side length of the square lattice")
    J: float = 1.0
    sign_convention: Literal["antiferromagnetic", "as_written"] = "antiferromagnetic"

    def build(self) -> Heisenberg2D:
        return Heisenberg2D(self.size, self.J, self.sign_convention, self.boundary or "open")


class HubbardBlock(_ModelBase):
    kind: Literal["hubbard"]
    size: int = Field(ge=2, le=32, description="number of sites")
    t: float = 1.0
    U: float = 1.0
    jw_ordering: Literal["interleaved", "blocked"] = "interleaved"

    def build(self) -> Hubbard:
        return Hubbard(self.size, self.t, self.U, self.boundary or "periodic", self.jw_ordering)


ModelBlock = Annotated[Union[TFIMBlock, HeisenbergBlock, HubbardBlock], Field(discriminator="kind")]


class AnsatzBlock(_Block):
    kind: Literal["mbhva", "cbhva", "mbhea"] = "mbhva"
    depth: int = Field(default=1, ge=1)
    parameter_sharing: bool = False


class BackendBlock(_Block):
    kind: Literal["circuit", "mbqc_forced_zero", "mbqc_sampled"] = "circuit"
    seed: int = Field(default=0, ge=0)


class OptimizerBlock(_Block):
    lr: float = Field(default=0.1, gt=0)
    beta1: float = Field(default=0.9, ge=0, lt=1)
    beta2: float = Field(default=0.999, ge=0, lt=1)
    eps: float = Field(default=1e-8, gt=0)
    steps: int = Field(default=200, ge=0)
    restarts: int = Field(default=1, ge=1)
    gradient: Literal["auto", "parameter_shift"] = "auto"
    workers: int = Field(default=1, ge=1)
    exclude_plateaued: bool = False


class VScoreBlock(_Block):
    e_inf: float = 0.0
    n_sites: Optional[int] = Field(default=None, ge=1)


class EquivalenceBlock(_Block):
    samples: int = Field(default=10, ge=1)
    tol: float = Field(default=1e-8, gt=0)
    sampled_seeds: int = Field(default=0, ge=0)


class EDBlock(_Block):
    tol: float = Field(default=1e-8, gt=0)
    max_iter: int = Field(default=5000, ge=1)


class OutputBlock(_Block):
    directory: str = "out"
    emit_dot: bool = True


class RunConfig(_Block):
    model: ModelBlock
    ansatz: AnsatzBlock = AnsatzBlock()
    backend: BackendBlock = BackendBlock()
    optimizer: OptimizerBlock = OptimizerBlock()
    vscore: VScoreBlock = VScoreBlock()
    equivalence: EquivalenceBlock = EquivalenceBlock()
    ed: EDBlock = EDBlock()
    output: OutputBlock = OutputBlock()

    @model_validator(mode="after")
    def _cross_checks(self):
        model = self.model
        n = model.build().n_qubits
        if model.initial_state == "bell" and n % 2:
            raise ValueError(f"model.initial_state: singlet pairs need an even number of qubits, model has {n}")
        if model.bell_pairing is not None:
            flat = sorted(q for pair in model.bell_pairing for q in pair)
            if flat != list(range(n)):
                raise ValueError(f"model.bell_pairing: must cover qubits 0..{n - 1} exactly once")
        if self.ansatz.kind == "mbhea" and not isinstance(model, HeisenbergBlock):
            raise ValueError("ansatz.kind: mbhea is only defined for the heisenberg model")
        if self.ansatz.parameter_sharing and self.ansatz.kind == "mbhea":
            raise ValueError("ansatz.parameter_sharing: does not apply to mbhea")
        return self

    def build_model(self):
        return self.model.build()

    def build_initial_state(self):
        model = self.build_model()
        choice = self.model.initial_state
        if choice == "default":
            # lattices with an odd number of spins cannot be tiled by singlets
            choice = "plus" if isinstance(model, TFIM) or model.n_qubits % 2 else "bell"
        if choice == "plus":
            return plus_state(model.n_qubits)
        pairing = [tuple(p) for p in self.model.bell_pairing] if self.model.bell_pairing else None
        return bell_pair_initial_state(model.n_qubits, pairing)

    def resolved(self) -> dict:
        """Every setting with defaults filled in, JSON-ready."""
        data = self.model_dump(mode="json")
        data["model"]["boundary"] = self.build_model().boundary
        return data


def _known_fields(data, loc) -> list[str]:
    """Field names valid at the parent of ``loc``."""
    cls = RunConfig
    node = data
    for key in loc[:-1]:
        if isinstance(key, int):
            return []
        fields = cls.model_fields
        if key in fields:
            annotation = fields[key].annotation
            node = node.get(key, {}) if isinstance(node, dict) else {}
            if key == "model":
                kind = node.get("kind") if isinstance(node, dict) else None
                cls = {"tfim": TFIMBlock, "heisenberg": HeisenbergBlock, "hubbard": HubbardBlock}.get(kind)
                if cls is None:
                    return []
            elif isinstance(annotation, type) and issubclass(annotation, BaseModel):
                cls = annotation
            else:
                return []
        elif key in ("tfim", "heisenberg", "hubbard"):
            continue
        else:
            return []
    return list(cls.model_fields)


def _format_errors(exc: ValidationError, data) -> list[tuple[str, str]]:
    problems = []
    for err in exc.errors():
        # drop the union tag pydantic inserts for discriminated unions
        loc = [k for k in err["loc"] if k not in ("tfim", "heisenberg", "hubbard")]
        path = ".".join(str(k) for k in loc) or "<root>"
        msg = err["msg"]
        if err["type"] == "value_error":
            msg = msg.removeprefix("Value error, ")
            if not loc and ": " in msg:
                path, msg = msg.split(": ", 1)
        elif err["type"] == "union_tag_invalid":
            tag = str(err.get("ctx", {}).get("tag", ""))
            msg = f"unknown kind {tag!r}"
            close = difflib.get_close_matches(tag, ["tfim", "heisenberg", "hubbard"], n=1)
            if close:
                msg += f" (did you mean {close[0]!r}?)"
        if err["type"] == "extra_forbidden":
            msg = "unknown key"
            close = difflib.get_close_matches(str(loc[-1]), _known_fields(data, err["loc"]), n=1)
            if close:
                msg += f" (did you mean {close[0]!r}?)"
        problems.append((path, msg))
    return problems


def parse_config(text: str) -> RunConfig:
    """Parse YAML (JSON is a subset) into a validated :class:`RunConfig`.

    Raises :class:`ConfigError` listing every problem found.
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([("<document>", f"not valid YAML: {exc}")]) from exc
    if not isinstance(data, dict):
        raise ConfigError([("<root>", "expected a mapping of blocks")])
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc, data)) from None
    except ValueError as exc:
        raise ConfigError([("<root>", str(exc))]) from None


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def dumps_resolved(config: RunConfig) -> str:
    return json.dumps(config.resolved(), indent=2, sort_keys=True)
