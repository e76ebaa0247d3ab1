"""Run configuration for the RICS vehicular-network simulator.

All tunables live in small dataclasses grouped by concern (topology, fading,
surface, radio, compute, training).  A run is described by a flat
``key = value`` text file; every field name is unique across the groups, so
files and ``--set`` overrides use bare field names.  Precedence is
defaults < file < overrides.
"""
from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, field


class ConfigError(ValueError):
    """Invalid configuration value or unparseable config file."""


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass
class TopologyConfig:
    """Cell layout and vehicle mobility geometry.

    The base station sits at the origin.  One surface per cell is placed on a
    circle of radius ``rics_radius``, equally spaced in angle.  Each cell's
    vehicle zone is a rectangle ``zone_length`` x ``zone_width`` whose near
    edge is ``zone_near`` metres from the origin, rotated to the cell's angle.
    Vehicles drive along the zone's long axis at ``vehicle_speed`` and reflect
    at the zone ends.
    """

    num_cells: int = 1
    avs_per_cell: int = 10
    v2v_per_cell: int = 2
    rics_elements: int = 30
    rics_radius: float = 80.0
    zone_length: float = 100.0
    zone_width: float = 40.0
    zone_near: float = 250.0
    vehicle_speed: float = 10.0
    slot_duration: float = 0.1

    @property
    def zone_far(self) -> float:
        return self.zone_near + self.zone_length

    def validate(self) -> None:
        if self.num_cells < 1:
            raise ConfigError("num_cells: must be >= 1")
        if self.avs_per_cell < 1:
            raise ConfigError("avs_per_cell: must be >= 1")
        if self.v2v_per_cell < 0:
            raise ConfigError("v2v_per_cell: must be >= 0")
        if self.rics_elements < 1:
            raise ConfigError("rics_elements: must be >= 1")
        for name in ("rics_radius", "zone_length", "zone_width", "zone_near",
                     "slot_duration"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name}: must be > 0")
        if self.vehicle_speed < 0:
            raise ConfigError("vehicle_speed: must be >= 0")


@dataclass
class FadingParams:
    """Large- and small-scale fading model parameters.

    Links that pass through the surface are Rician with a line-of-sight part
    built from array steering at the geometric angles; direct links are
    Rayleigh.  ``deterministic=True`` freezes all small-scale randomness to
    the unit line-of-sight response (test mode).
    """

    ref_gain: float = 1e-3        # power gain at the reference distance
    ref_distance: float = 1.0
    pathloss_exp: float = 2.5
    rician_ur: float = 3.0        # AV -> surface
    rician_rv: float = 3.0        # surface -> V2V receiver
    rician_rb: float = 3.0        # surface -> base station
    deterministic: bool = False

    def validate(self) -> None:
        for name in ("ref_gain", "ref_distance", "pathloss_exp"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name}: must be > 0")
        for name in ("rician_ur", "rician_rv", "rician_rb"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name}: must be >= 0")


@dataclass
class RicsConfig:
    """Surface control parameters.

    ``num_elements`` is kept in sync with ``TopologyConfig.rics_elements`` by
    ``RunConfig.finalize``; the file format exposes only ``rics_elements``.
    Elements are grouped into ``num_subblocks`` equal blocks that share one
    reflect phase and one transmit phase, each drawn from a ``phase_bits``-bit
    uniform codebook.  ``beta_r + beta_t = 1`` splits the element energy;
    ``psi`` scales the transmission amplitude (0 disables transmission).
    """

    num_elements: int = 30
    num_subblocks: int = 2
    phase_bits: int = 2
    beta_r: float = 0.5
    beta_t: float = 0.5
    psi: float = 1.3
    enabled: bool = True

    def validate(self) -> None:
        if self.num_subblocks < 1:
            raise ConfigError("num_subblocks: must be >= 1")
        if self.num_elements % self.num_subblocks != 0:
            raise ConfigError("rics_elements: must be divisible by num_subblocks")
        if self.phase_bits < 1:
            raise ConfigError("phase_bits: must be >= 1")
        if not (0.0 <= self.beta_r <= 1.0 and 0.0 <= self.beta_t <= 1.0):
            raise ConfigError("beta_r/beta_t: must lie in [0, 1]")
        if abs(self.beta_r + self.beta_t - 1.0) > 1e-12:
            raise ConfigError("beta_r + beta_t must equal 1")
        if self.psi < 0:
            raise ConfigError("psi: must be >= 0")


@dataclass
class PhyConfig:
    """Radio-link constants: powers, noise, bandwidth, outage transform."""

    bandwidth_hz: float = 10e6
    noise_dbm: float = -110.0
    p_av_dbm: float = 29.0        # AV uplink transmit power
    p_v2v_dbm: float = 22.0       # V2V transmit power
    gamma_th: float = 2.0         # outage SINR threshold (linear)
    p_outage: float = 0.01        # tolerated outage probability
    varpi: float = 5.0            # logistic steepness of the outage transform
    delta: float = 5.0            # smooth-step steepness
    n_mc: int = 32                # small-scale redraws for mean-SINR estimates

    @property
    def noise_w(self) -> float:
        return dbm_to_watt(self.noise_dbm)

    @property
    def p_av_w(self) -> float:
        return dbm_to_watt(self.p_av_dbm)

    @property
    def p_v2v_w(self) -> float:
        return dbm_to_watt(self.p_v2v_dbm)

    def validate(self) -> None:
        if self.bandwidth_hz <= 0:
            raise ConfigError("bandwidth_hz: must be > 0")
        if not (0.0 < self.p_outage < 1.0):
            raise ConfigError("p_outage: must lie strictly in (0, 1)")
        if self.varpi <= 0:
            raise ConfigError("varpi: must be > 0")
        if self.delta <= 0:
            raise ConfigError("delta: must be > 0")
        if self.gamma_th <= 0:
            raise ConfigError("gamma_th: must be > 0")
        if self.n_mc < 1:
            raise ConfigError("n_mc: must be >= 1")


@dataclass
class ComputeConfig:
    """Task and processing model.

    Per-episode draws: task size ``s`` in bits, task cycles, local CPU speed.
    ``f_mec_per_av`` is the edge compute dedicated to each AV regardless of
    cell count; the multi-cell coupling enters only through the shared
    worst-task compute term.  ``max_delay`` is carried per task but only
    enforced when ``enforce_deadline`` is set.
    """

    f_local_min: float = 1e9
    f_local_max: float = 5e9
    f_mec_per_av: float = 50e9
    accuracy_ratio: float = 0.7   # local accuracy as a fraction of edge accuracy
    bs_accuracy: float = 0.8
    s_min: float = 1e6
    s_max: float = 3e6
    cycles_min: float = 5e9
    cycles_max: float = 8e9
    max_delay: float = 0.5
    enforce_deadline: bool = False

    def validate(self) -> None:
        for lo, hi in (("f_local_min", "f_local_max"), ("s_min", "s_max"),
                       ("cycles_min", "cycles_max")):
            if getattr(self, lo) <= 0:
                raise ConfigError(f"{lo}: must be > 0")
            if getattr(self, hi) < getattr(self, lo):
                raise ConfigError(f"{hi}: must be >= {lo}")
        if self.f_mec_per_av <= 0:
            raise ConfigError("f_mec_per_av: must be > 0")
        if not (0.0 <= self.accuracy_ratio <= 1.0):
            raise ConfigError("accuracy_ratio: must lie in [0, 1]")
        if not (0.0 <= self.bs_accuracy <= 1.0):
            raise ConfigError("bs_accuracy: must lie in [0, 1]")
        if self.max_delay <= 0:
            raise ConfigError("max_delay: must be > 0")


@dataclass
class TrainConfig:
    """Learning schedule shared by all agents."""

    episodes: int = 600
    steps_per_episode: int = 200
    batch_size: int = 32
    memory_capacity: int = 5000
    learning_rate: float = 1e-4
    lr_decay: float = 0.999       # per-episode hyperbolic decay coefficient
    epsilon_initial: float = 1.0
    epsilon_decay: float = 0.999  # per-step multiplicative decay
    epsilon_floor: float = 0.01
    discount: float = 0.95
    tau: float = 0.01             # soft target-update rate
    warmup_batches: int = 10      # updates start at warmup_batches * batch_size
    penalty: float = 10.0         # flat reward penalty on sharing conflicts
    eval_episodes: int = 20

    def validate(self) -> None:
        for name in ("episodes", "steps_per_episode", "batch_size",
                     "memory_capacity", "warmup_batches", "eval_episodes"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name}: must be >= 1")
        if self.batch_size > self.memory_capacity:
            raise ConfigError("batch_size: must not exceed memory_capacity")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate: must be > 0")
        if self.lr_decay < 0:
            raise ConfigError("lr_decay: must be >= 0")
        if not (0.0 <= self.discount <= 1.0):
            raise ConfigError("discount: must lie in [0, 1]")
        if not (0.0 <= self.tau <= 1.0):
            raise ConfigError("tau: must lie in [0, 1]")
        if not (0.0 <= self.epsilon_floor <= self.epsilon_initial <= 1.0):
            raise ConfigError("epsilon: need 0 <= floor <= initial <= 1")
        if not (0.0 < self.epsilon_decay <= 1.0):
            raise ConfigError("epsilon_decay: must lie in (0, 1]")
        if self.penalty < 0:
            raise ConfigError("penalty: must be >= 0")


_GROUPS = ("topology", "fading", "rics", "phy", "compute", "train")
# keys handled outside the group dataclasses
_TOP_LEVEL_KEYS = ("run_name", "seeds")
# rics_elements is the single source of truth for the element count
_HIDDEN_KEYS = {"num_elements"}


@dataclass
class RunConfig:
    """Everything needed to reproduce a run, plus the seed list."""

    run_name: str = "run"
    seeds: tuple[int, ...] = (0,)
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    fading: FadingParams = field(default_factory=FadingParams)
    rics: RicsConfig = field(default_factory=RicsConfig)
    phy: PhyConfig = field(default_factory=PhyConfig)
    compute: ComputeConfig = field(default_factory=ComputeConfig)
    train: TrainConfig = field(default_factory=TrainConfig)

    def finalize(self) -> "RunConfig":
        """Sync derived fields and validate; returns self for chaining."""
        self.rics.num_elements = self.topology.rics_elements
        if not self.seeds:
            raise ConfigError("seeds: need at least one seed")
        for group in _GROUPS:
            getattr(self, group).validate()
        return self

    def to_lines(self) -> list[str]:
        """Canonical serialization: sorted ``key = value`` lines."""
        pairs = {"run_name": self.run_name,
                 "seeds": ",".join(str(s) for s in self.seeds)}
        for group in _GROUPS:
            cfg = getattr(self, group)
            for f in dataclasses.fields(cfg):
                if f.name in _HIDDEN_KEYS:
                    continue
                pairs[f.name] = _format_value(getattr(cfg, f.name))
        return [f"{k} = {pairs[k]}" for k in sorted(pairs)]

    def config_hash(self) -> str:
        text = "\n".join(self.to_lines())
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _build_key_map() -> dict[str, str]:
    mapping: dict[str, str] = {}
    for group in _GROUPS:
        cls = RunConfig.__dataclass_fields__[group].default_factory  # type: ignore[union-attr]
        for f in dataclasses.fields(cls):
            if f.name in _HIDDEN_KEYS:
                continue
            if f.name in mapping:
                raise AssertionError(f"duplicate config key {f.name!r}")
            mapping[f.name] = group
    return mapping


_KEY_MAP = _build_key_map()


def _parse_value(key: str, raw: str, kind: type, where: str):
    raw = raw.strip()
    try:
        if kind is bool:
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {key} value {raw!r} as {kind.__name__}")


def _apply(config: RunConfig, key: str, raw: str, where: str) -> None:
    if key == "run_name":
        config.run_name = raw.strip()
        return
    if key == "seeds":
        try:
            config.seeds = tuple(int(p) for p in raw.split(",") if p.strip())
        except ValueError:
            raise ConfigError(f"{where}: cannot parse seeds {raw!r}")
        return
    group = _KEY_MAP.get(key)
    if group is None:
        raise ConfigError(f"{where}: unknown key {key!r}")
    target = getattr(config, group)
    f = target.__dataclass_fields__[key]
    kind = {"int": int, "float": float, "bool": bool, "str": str}[f.type]
    setattr(target, key, _parse_value(key, raw, kind, where))


def parse_overrides(config: RunConfig, overrides) -> RunConfig:
    """Apply ``key=value`` override strings in order."""
    for i, item in enumerate(overrides or ()):
        if "=" not in item:
            raise ConfigError(f"override {i + 1} ({item!r}): expected key=value")
        key, _, raw = item.partition("=")
        _apply(config, key.strip(), raw, f"override {i + 1}")
    return config


def load_config(path=None, overrides=None) -> RunConfig:
    """Build a RunConfig from defaults, an optional file, and overrides."""
    config = RunConfig()
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                text = line.split("#", 1)[0].strip()
                if not text:
                    continue
                if "=" not in text:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                key, _, raw = text.partition("=")
                _apply(config, key.strip(), raw, f"{path}:{lineno}")
    parse_overrides(config, overrides)
    return config.finalize()


def config_from_lines(lines) -> RunConfig:
    """Rebuild a RunConfig from ``to_lines`` output (round-trip)."""
    config = RunConfig()
    for i, text in enumerate(lines, start=1):
        text = text.split("#", 1)[0].strip()
        if not text:
            continue
        key, _, raw = text.partition("=")
        _apply(config, key.strip(), raw, f"line {i}")
    return config.finalize()
