"""
Experiment configuration: a single JSON document.

Example::

    {
      "dims": {"d_i": 2, "d_o": 2, "d_q": 10},
      "coin": {"kind": "hadamard"},
      "mode": "quantum",
      "initial_state": "paper-initial",
      "run": {"t_max": 500, "eps": 1e-6},
      "output": {"dir": "out/hadamard", "formats": ["csv", "json"]}
    }

A configuration has either a ``run`` section (single trajectory) or a
``montecarlo`` section, never both. See ``configs/`` for one file per experiment.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, InvalidChannelError, InvalidDimsError, InvalidStateError
from .qcore import matrix_from_json, matrix_to_json, validate_density_matrix
from .queue import COIN_KINDS, INITIAL_STATE_PRESETS, CoinSpec, QueueDims, initial_state
from .randstates import STATE_KINDS, SampleConfig

FORMATS = ("csv", "json", "svg")
_TOP_KEYS = {"dims", "coin", "mode", "initial_state", "run", "montecarlo", "seed", "output"}


@dataclass(frozen=True)
class RunConfig:
    t_max: int = 500
    eps: float = 1e-6
    window: int = 10
    checkpoint_every: int | None = 50


@dataclass
class ExperimentConfig:
    dims: QueueDims
    coin: CoinSpec
    mode: str = "quantum"
    initial_state: str | np.ndarray = "paper-initial"
    queue_length: int | None = None
    run: RunConfig | None = None
    montecarlo: SampleConfig | None = None
    seed: int = 0
    out_dir: str | None = None
    formats: tuple[str, ...] = ("csv", "json")
    workers: int = 1
    source: dict = field(default_factory=dict, repr=False)

    @property
    def classical(self) -> bool:
        return self.mode == "classical"

    def resolve_initial_state(self) -> np.ndarray:
        if isinstance(self.initial_state, np.ndarray):
            return self.initial_state
        rng = np.random.Generator(np.random.PCG64(self.seed))
        return initial_state(self.initial_state, self.dims, rng=rng, queue_length=self.queue_length)

    def to_dict(self) -> dict:
        init = (matrix_to_json(self.initial_state) if isinstance(self.initial_state, np.ndarray)
                else self.initial_state)
        return {
            "dims": self.dims.to_dict(),
            "coin": self.coin.to_dict(),
            "mode": self.mode,
            "initial_state": init,
            "queue_length": self.queue_length,
            "run": asdict(self.run) if self.run else None,
            "montecarlo": asdict(self.montecarlo) if self.montecarlo else None,
            "seed": self.seed,
            "formats": list(self.formats),
            "workers": self.workers,
        }


def _require(obj, key, path, kind):
    if key not in obj:
        raise ConfigError(f"{path}{key}: missing required field")
    val = obj[key]
    if kind is int and (isinstance(val, bool) or not isinstance(val, int)):
        raise ConfigError(f"{path}{key}: expected integer, got {val!r}")
    if kind is float and (isinstance(val, bool) or not isinstance(val, (int, float))):
        raise ConfigError(f"{path}{key}: expected number, got {val!r}")
    return val


def _opt(obj, key, path, kind, default):
    return _require(obj, key, path, kind) if key in obj else default


def _parse_dims(obj) -> QueueDims:
    if not isinstance(obj, dict):
        raise ConfigError("dims: expected an object with d_i, d_o, d_q")
    try:
        return QueueDims(*(_require(obj, k, "dims.", int) for k in ("d_i", "d_o", "d_q")))
    except InvalidDimsError as exc:
        raise ConfigError(f"dims: {exc}") from exc


def _parse_coin(obj) -> CoinSpec:
    if isinstance(obj, str):
        obj = {"kind": obj}
    if not isinstance(obj, dict):
        raise ConfigError("coin: expected an object or a coin name")
    kind = obj.get("kind")
    if kind not in COIN_KINDS:
        raise ConfigError(f"coin.kind: expected one of {COIN_KINDS}, got {kind!r}")
    unknown = set(obj) - {"kind", "n", "d", "matrix", "operators", "per_register", "reset_state"}
    if unknown:
        raise ConfigError(f"coin: unknown fields {sorted(unknown)}")
    try:
        return CoinSpec(
            kind=kind,
            n=_opt(obj, "n", "coin.", int, None),
            d=_opt(obj, "d", "coin.", int, None),
            matrix=matrix_from_json(obj["matrix"]) if "matrix" in obj else None,
            operators=tuple(matrix_from_json(m) for m in obj["operators"]) if "operators" in obj else None,
            per_register=bool(obj.get("per_register", True)),
            reset_state=_opt(obj, "reset_state", "coin.", int, 0),
        )
    except (ValueError, InvalidChannelError, InvalidDimsError) as exc:
        raise ConfigError(f"coin: {exc}") from exc


def parse_config(doc: dict) -> ExperimentConfig:
    """Validate a decoded JSON document; every failure is a :class:`ConfigError`."""
    if not isinstance(doc, dict):
        raise ConfigError("top level: expected a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"top level: unknown fields {sorted(unknown)}")
    dims = _parse_dims(doc.get("dims"))
    coin = _parse_coin(doc.get("coin", "identity"))
    mode = doc.get("mode", "quantum")
    if mode not in ("quantum", "classical"):
        raise ConfigError(f"mode: expected 'quantum' or 'classical', got {mode!r}")
    seed = _opt(doc, "seed", "", int, 0)

    init = doc.get("initial_state", "paper-initial")
    queue_length = None
    if isinstance(init, dict) and "preset" in init:
        queue_length = _opt(init, "queue_length", "initial_state.", int, None)
        init = init["preset"]
    if isinstance(init, str):
        if init not in INITIAL_STATE_PRESETS:
            raise ConfigError(f"initial_state: expected one of {INITIAL_STATE_PRESETS}, got {init!r}")
    elif isinstance(init, dict) and "matrix" in init:
        try:
            init = validate_density_matrix(matrix_from_json(init["matrix"]))
        except (InvalidStateError, InvalidDimsError, ValueError) as exc:
            raise ConfigError(f"initial_state.matrix: {exc}") from exc
        if init.shape[0] != dims.total:
            raise ConfigError(f"initial_state.matrix: dimension {init.shape[0]} != {dims.total}")
    else:
        raise ConfigError("initial_state: expected a preset name, {preset: ...} or {matrix: ...}")

    has_run, has_mc = "run" in doc, "montecarlo" in doc
    if has_run and has_mc:
        raise ConfigError("run/montecarlo: exactly one of the two sections may be present")
    run = mc = None
    workers = 1
    if has_run:
        r = doc["run"]
        if not isinstance(r, dict):
            raise ConfigError("run: expected an object")
        run = RunConfig(
            t_max=_opt(r, "t_max", "run.", int, 500),
            eps=float(_opt(r, "eps", "run.", float, 1e-6)),
            window=_opt(r, "window", "run.", int, 10),
            checkpoint_every=_opt(r, "checkpoint_every", "run.", int, 50),
        )
        if run.t_max < 0 or run.eps <= 0 or run.window < 1:
            raise ConfigError("run: need t_max >= 0, eps > 0, window >= 1")
    if has_mc:
        m = doc["montecarlo"]
        if not isinstance(m, dict):
            raise ConfigError("montecarlo: expected an object")
        state_kind = m.get("state_kind", "full-system")
        if state_kind not in STATE_KINDS:
            raise ConfigError(f"montecarlo.state_kind: expected one of {STATE_KINDS}, got {state_kind!r}")
        workers = _opt(m, "workers", "montecarlo.", int, 1)
        try:
            mc = SampleConfig(
                n_samples=_opt(m, "n_samples", "montecarlo.", int, 1000),
                seed=_opt(m, "seed", "montecarlo.", int, seed),
                eps=float(_opt(m, "eps", "montecarlo.", float, 1e-6)),
                t_max=_opt(m, "t_max", "montecarlo.", int, 5000),
                window=_opt(m, "window", "montecarlo.", int, 10),
                state_kind=state_kind,
                queue_length=_opt(m, "queue_length", "montecarlo.", int, None),
            )
        except ValueError as exc:
            raise ConfigError(f"montecarlo: {exc}") from exc

    out = doc.get("output", {})
    if not isinstance(out, dict):
        raise ConfigError("output: expected an object")
    formats = tuple(out.get("formats", ("csv", "json")))
    bad = [f for f in formats if f not in FORMATS]
    if bad:
        raise ConfigError(f"output.formats: unknown formats {bad}; expected a subset of {FORMATS}")
    return ExperimentConfig(dims=dims, coin=coin, mode=mode, initial_state=init, queue_length=queue_length,
                            run=run, montecarlo=mc, seed=seed, out_dir=out.get("dir"), formats=formats,
                            workers=workers, source=doc)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return parse_config(doc)
