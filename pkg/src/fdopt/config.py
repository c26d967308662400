"""Plain-text run configuration.

Syntax: `[section]` headers, `key = value` lines, `#` starts a comment
anywhere on a line. Sections: [trainer], [estimator], [ensemble],
[target], and optionally [source] (a second population for regression
pretraining). Representations are indexed entries (rep.0.kind, ...) inside
[ensemble]; mixture components are indexed (comp.0.weight, comp.0.mean,
comp.0.cov, ...) inside [target]/[source], with cov given row-major.

Unknown sections or keys are rejected rather than defaulted, so a typo in
beta/capacity/c cannot silently change a run. Every value is a pure
function of the file text; representation in_dim always equals the
generator's out_dim.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .representations import (
    RepresentationEnsemble,
    RepresentationSpec,
    quadratic_out_dim,
)
from .trainer import TargetSpec, TrainConfig

__all__ = ["LoadedConfig", "parse_config", "load_config", "build_config"]

_SECTION_KEYS = {
    "trainer": {
        "seed",
        "batch_size",
        "total_steps",
        "warmup_steps",
        "peak_lr",
        "beta1",
        "beta2",
        "weight_decay",
        "warm_start_count",
        "z_dim",
        "hidden",
        "out_dim",
        "pretrain_steps",
    },
    "estimator": {"kind", "beta", "capacity"},
    "ensemble": {"c", "weights"},
    "target": {"kind", "sample_seed", "path"},
    "source": {"kind", "sample_seed", "path"},
}
_REP_KEY = re.compile(r"^rep\.(\d+)\.(kind|seed|out_dim|scale)$")
_COMP_KEY = re.compile(r"^comp\.(\d+)\.(weight|mean|cov)$")


def parse_config(text: str) -> dict[str, dict[str, str]]:
    """Text -> {section: {key: raw value}}, validating shape only."""
    sections: dict[str, dict[str, str]] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in _SECTION_KEYS:
                raise ConfigError(
                    f"line {lineno}: unknown section [{current}]; expected one "
                    f"of {sorted(_SECTION_KEYS)}"
                )
            if current in sections:
                raise ConfigError(f"line {lineno}: duplicate section [{current}]")
            sections[current] = {}
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        if current is None:
            raise ConfigError(f"line {lineno}: key outside any [section]")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in sections[current]:
            raise ConfigError(f"line {lineno}: duplicate key {current}.{key}")
        _check_key(current, key, lineno)
        sections[current][key] = value
    return sections


def _check_key(section: str, key: str, lineno: int) -> None:
    if key in _SECTION_KEYS[section]:
        return
    if section == "ensemble" and _REP_KEY.match(key):
        return
    if section in ("target", "source") and _COMP_KEY.match(key):
        return
    raise ConfigError(f"line {lineno}: unknown key {key!r} in section [{section}]")


def _get_int(section: dict, name: str, default=None, where: str = "") -> int:
    if name not in section:
        if default is None:
            raise ConfigError(f"missing required key {where}{name}")
        return default
    try:
        return int(section[name])
    except ValueError:
        raise ConfigError(f"{where}{name}: not an integer: {section[name]!r}") from None


def _get_float(section: dict, name: str, default=None, where: str = "") -> float:
    if name not in section:
        if default is None:
            raise ConfigError(f"missing required key {where}{name}")
        return default
    try:
        return float(section[name])
    except ValueError:
        raise ConfigError(f"{where}{name}: not a number: {section[name]!r}") from None


def _float_list(raw: str, where: str) -> list[float]:
    if not raw.strip():
        return []
    try:
        return [float(part) for part in raw.split(",")]
    except ValueError:
        raise ConfigError(f"{where}: not a comma-separated number list: {raw!r}") from None


def _int_list(raw: str, where: str) -> tuple[int, ...]:
    values = _float_list(raw, where)
    out = tuple(int(v) for v in values)
    if any(o != v for o, v in zip(out, values)):
        raise ConfigError(f"{where}: expected integers, got {raw!r}")
    return out


def _indexed(section: dict, pattern: re.Pattern, what: str):
    """Collect {index: {field: value}}, requiring indices 0..K-1."""
    groups: dict[int, dict[str, str]] = {}
    for key, value in section.items():
        match = pattern.match(key)
        if match:
            groups.setdefault(int(match.group(1)), {})[match.group(2)] = value
    if not groups:
        raise ConfigError(f"no {what} entries found")
    want = set(range(len(groups)))
    if set(groups) != want:
        raise ConfigError(
            f"{what} indices must be 0..{len(groups) - 1}, got {sorted(groups)}"
        )
    return [groups[i] for i in range(len(groups))]


def _build_ensemble(section: dict, in_dim: int) -> RepresentationEnsemble:
    reps = _indexed(section, _REP_KEY, "rep.N.*")
    specs = []
    for i, fields in enumerate(reps):
        where = f"ensemble.rep.{i}."
        kind = fields.get("kind")
        if kind is None:
            raise ConfigError(f"missing required key {where}kind")
        if kind == "identity":
            default_out = in_dim
        elif kind == "quadratic":
            default_out = quadratic_out_dim(in_dim)
        else:
            default_out = None
        out_dim = _get_int(fields, "out_dim", default_out, where)
        specs.append(
            RepresentationSpec(
                kind=kind,
                seed=_get_int(fields, "seed", 0, where),
                in_dim=in_dim,
                out_dim=out_dim,
                scale=_get_float(fields, "scale", 1.0, where),
            )
        )
    weights = ()
    if "weights" in section:
        weights = tuple(_float_list(section["weights"], "ensemble.weights"))
    return RepresentationEnsemble(
        specs=tuple(specs),
        weights=weights,
        c=_get_float(section, "c", 0.01, "ensemble."),
    )


def _build_target(section: dict, name: str) -> TargetSpec:
    kind = section.get("kind", "mixture")
    if kind == "file":
        if "path" not in section:
            raise ConfigError(f"missing required key {name}.path")
        return TargetSpec.from_file(section["path"])
    if kind != "mixture":
        raise ConfigError(f"{name}.kind must be mixture or file, got {kind!r}")
    comps = _indexed(section, _COMP_KEY, f"{name} comp.N.*")
    means, covs, weights = [], [], []
    for i, fields in enumerate(comps):
        where = f"{name}.comp.{i}."
        for field in ("weight", "mean", "cov"):
            if field not in fields:
                raise ConfigError(f"missing required key {where}{field}")
        mean = _float_list(fields["mean"], where + "mean")
        cov = _float_list(fields["cov"], where + "cov")
        d = len(mean)
        if len(cov) != d * d:
            raise ConfigError(
                f"{where}cov needs {d * d} row-major entries for a {d}-dim "
                f"mean, got {len(cov)}"
            )
        means.append(mean)
        covs.append(np.array(cov).reshape(d, d))
        weights.append(_get_float(fields, "weight", where=where))
    return TargetSpec.mixture(
        means=np.array(means),
        covs=np.array(covs),
        weights=np.array(weights),
        sample_seed=_get_int(section, "sample_seed", 0, f"{name}."),
    )


@dataclass(frozen=True)
class LoadedConfig:
    ensemble: RepresentationEnsemble
    train: TrainConfig | None
    source: TargetSpec | None
    pretrain_steps: int


def build_config(sections: dict[str, dict[str, str]]) -> LoadedConfig:
    trainer = sections.get("trainer", {})
    out_dim = _get_int(trainer, "out_dim", 2, "trainer.")
    if "ensemble" not in sections:
        raise ConfigError("missing required section [ensemble]")
    ensemble = _build_ensemble(sections["ensemble"], in_dim=out_dim)

    estimator = sections.get("estimator", {})
    est_kind = estimator.get("kind", "ema")

    source = None
    if "source" in sections:
        source = _build_target(sections["source"], "source")

    train = None
    if "target" in sections:
        warm = None
        if "warm_start_count" in trainer:
            warm = _get_int(trainer, "warm_start_count", where="trainer.")
        train = TrainConfig(
            ensemble=ensemble,
            target=_build_target(sections["target"], "target"),
            seed=_get_int(trainer, "seed", 0, "trainer."),
            batch_size=_get_int(trainer, "batch_size", 128, "trainer."),
            total_steps=_get_int(trainer, "total_steps", 3000, "trainer."),
            warmup_steps=_get_int(trainer, "warmup_steps", 150, "trainer."),
            peak_lr=_get_float(trainer, "peak_lr", 1e-3, "trainer."),
            beta1=_get_float(trainer, "beta1", 0.9, "trainer."),
            beta2=_get_float(trainer, "beta2", 0.95, "trainer."),
            weight_decay=_get_float(trainer, "weight_decay", 0.0, "trainer."),
            estimator=est_kind,
            ema_beta=_get_float(estimator, "beta", 0.999, "estimator."),
            queue_capacity=_get_int(estimator, "capacity", 1024, "estimator."),
            warm_start_count=warm,
            z_dim=_get_int(trainer, "z_dim", 8, "trainer."),
            hidden=_int_list(trainer.get("hidden", "64, 64"), "trainer.hidden"),
            out_dim=out_dim,
        )
    return LoadedConfig(
        ensemble=ensemble,
        train=train,
        source=source,
        pretrain_steps=_get_int(trainer, "pretrain_steps", 1000, "trainer."),
    )


def load_config(path: str) -> LoadedConfig:
    with open(path, "r", encoding="utf-8") as handle:
        return build_config(parse_config(handle.read()))
