"""Experiment manifests.

An INI file with one ``[experiment]`` section and optional per-scheme
``[scheme:<Name>]`` override sections::

    [experiment]
    schemes = DescOnly, SketchDesc, FirstFrameDesc
    snr_grid_db = 0, 2, 4, 6, 8, 10
    trials = 3
    base_seed = 7777
    fixtures = clip0.gvt, clip1.gvt      ; relative to this file
    output = results.csv                 ; relative to this file
    description = a red ball rolls across a wooden table
    loss_k = 0.3
    threshold_db = 0
    workers = 1
    record_wall_time = false
    figures = false

    [scheme:SketchDesc]
    avg_tokens = 95.63
    turbo_iterations = 8
    symbols = 1024

Recognised scheme keys: ``avg_tokens``, ``bits_per_token``, ``turbo_block``,
``turbo_iterations`` (text chain); ``symbols`` or ``visual_cbr`` (JSCC
chain). ``Adaptive`` may be listed as a scheme: it picks a catalog scheme per
SNR with ``threshold_db``. Without ``fixtures`` a synthetic clip is used.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass
from pathlib import Path

from ..errors import ConfigurationError
from ..strategy import JsccChain, SchemeConfig, SchemeKind, default_catalog

ADAPTIVE = "Adaptive"
ADAPTIVE_ID = 8
DEFAULT_GRID = tuple(float(v) for v in range(11))
DEFAULT_DESCRIPTION = "a red ball rolls slowly across a wooden table while the camera pans left"

_TEXT_KEYS = {"avg_tokens": float, "bits_per_token": int, "turbo_block": int, "turbo_iterations": int}


@dataclass(frozen=True)
class ExperimentConfig:
    schemes: tuple  # SchemeConfig entries, or ADAPTIVE
    snr_grid_db: tuple[float, ...] = DEFAULT_GRID
    trials: int = 1
    base_seed: int = 7777
    fixture_paths: tuple[Path, ...] = ()
    output_path: Path = Path("results.csv")
    description: str = DEFAULT_DESCRIPTION
    loss_k: float = 0.3
    threshold_db: float = 0.0
    workers: int = 1
    record_wall_time: bool = False
    figures: bool = False
    catalog: dict | None = None

    def __post_init__(self):
        if not self.schemes:
            raise ConfigurationError("no schemes configured")
        if not self.snr_grid_db:
            raise ConfigurationError("empty SNR grid")
        if self.trials < 1:
            raise ConfigurationError("trials must be >= 1")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")
        if not 0 <= self.base_seed < 2**64:
            raise ConfigurationError("base_seed must fit in 64 bits")
        if not 0.0 <= self.loss_k <= 1.0:
            raise ConfigurationError("loss_k must lie in [0, 1]")
        if self.catalog is None:
            object.__setattr__(self, "catalog", default_catalog())


def _split(value: str) -> list[str]:
    return [v.strip() for v in value.replace("\n", ",").split(",") if v.strip()]


def _override(scheme: SchemeConfig, section) -> SchemeConfig:
    unknown = set(section) - set(_TEXT_KEYS) - {"symbols", "visual_cbr"}
    if unknown:
        raise ConfigurationError(f"unknown keys in [scheme:{scheme.name}]: {', '.join(sorted(unknown))}")
    text, visual = scheme.text_chain, scheme.visual_chain
    try:
        text_changes = {k: cast(section[k]) for k, cast in _TEXT_KEYS.items() if k in section}
        if text_changes:
            if text is None:
                raise ConfigurationError(f"{scheme.name} has no text chain to configure")
            text = dataclasses.replace(text, **text_changes)
        if "symbols" in section or "visual_cbr" in section:
            if not isinstance(visual, JsccChain):
                raise ConfigurationError(f"{scheme.name} has no JSCC chain to configure")
            if "symbols" in section and "visual_cbr" in section:
                raise ConfigurationError("give either symbols or visual_cbr, not both")
            if "symbols" in section:
                visual = JsccChain(visual.source, symbols=int(section["symbols"]))
            else:
                visual = JsccChain(visual.source, cbr=float(section["visual_cbr"]))
    except ValueError as exc:
        raise ConfigurationError(f"[scheme:{scheme.name}]: {exc}") from None
    return dataclasses.replace(scheme, text_chain=text, visual_chain=visual)


def parse_config(text: str, base_dir: Path = Path(".")) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"config syntax: {exc}") from None
    if "experiment" not in parser:
        raise ConfigurationError("missing [experiment] section")
    exp = parser["experiment"]
    catalog = default_catalog()
    for name in parser.sections():
        if name.startswith("scheme:"):
            kind = SchemeKind.parse(name.split(":", 1)[1])
            catalog[kind] = _override(catalog[kind], parser[name])
        elif name != "experiment":
            raise ConfigurationError(f"unknown section [{name}]")

    schemes = []
    for name in _split(exp.get("schemes", "")):
        schemes.append(ADAPTIVE if name.lower() == ADAPTIVE.lower() else catalog[SchemeKind.parse(name)])
    try:
        grid = tuple(float(v) for v in _split(exp["snr_grid_db"])) if "snr_grid_db" in exp else DEFAULT_GRID
        cfg = ExperimentConfig(
            schemes=tuple(schemes),
            snr_grid_db=grid,
            trials=exp.getint("trials", 1),
            base_seed=int(exp.get("base_seed", "7777"), 0),
            fixture_paths=tuple(base_dir / p for p in _split(exp.get("fixtures", ""))),
            output_path=base_dir / exp.get("output", "results.csv"),
            description=exp.get("description", DEFAULT_DESCRIPTION),
            loss_k=exp.getfloat("loss_k", 0.3),
            threshold_db=exp.getfloat("threshold_db", 0.0),
            workers=exp.getint("workers", 1),
            record_wall_time=exp.getboolean("record_wall_time", False),
            figures=exp.getboolean("figures", False),
            catalog=catalog,
        )
    except ValueError as exc:
        raise ConfigurationError(f"[experiment]: {exc}") from None
    known = {
        "schemes", "snr_grid_db", "trials", "base_seed", "fixtures", "output", "description",
        "loss_k", "threshold_db", "workers", "record_wall_time", "figures",
    }  # fmt: skip
    unknown = set(exp) - known
    if unknown:
        raise ConfigurationError(f"unknown keys in [experiment]: {', '.join(sorted(unknown))}")
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(), path.parent)
