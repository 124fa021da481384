"""Scenario configuration, validation presets, and seeded orchestration.

A scenario is a JSON document (or a preset name) that fixes the array, the
users' clusters, the resource grid, the RB correlation model, a seed, and
the requested output artifacts.  Running a scenario is deterministic given
the seed: every realization draws from its own counter-based substream, so
results are bitwise identical across repeat runs and across thread counts.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import analytics
from .assembly import assemble_channel
from .errors import ConfigError
from .model import (RANDOM_DIRECTION, ArrayGeometry, ClusterSpec, ResourceGrid,
                    UserSpec, build_spatial_pair, draw_direction)
from .stochastic import CorrelationSpec, build_covariance, sample_q_block, substream

ARTIFACT_NAMES = ("histogram", "cross-correlation", "eigencdf",
                  "power-profile", "correlation-matrix", "raw-channel")

DEFAULT_BINS = 64
DEFAULT_PRESET_SEED = 1000003

# Frozen validation geometry: stratified principal user directions plus
# per-cluster offsets that scale with the cluster's angular spread, so the
# LOS and NLOS variants of one scenario share the same underlying draw and
# differ only through their spread fractions.
_K3_PRINCIPAL = (0.25111391655907217, 1.675313356991702, 2.386720909548449)
_K3_OFFSETS = ((-1.4398305372311229, 1.1242432238146183, -1.2684029636672087),
               (1.4003292775809402, -0.3916041804884667, -1.0575825162877153),
               (0.08908149162317724, -0.48545964647806206, -0.7609054870675304))
_K6_PRINCIPAL = (0.12555695827953609, 0.837656678495851, 1.1933604547742245,
                 1.640618309629896, 2.5060935867009606, 2.710672870635016)
_K6_OFFSETS = ((1.4003292775809402, -0.3916041804884667, -1.0575825162877153),
               (0.08908149162317724, -0.48545964647806206, -0.7609054870675304),
               (0.4011294607407494, -0.496410251801096, -0.24803178644918855),
               (0.6857236484089309, 0.5690262286997689, 0.4247061913718053),
               (1.401991652038597, 0.7798872776244901, -0.8998413060276411),
               (0.13707275693096022, 0.74462317203957, -1.0141169005376334))

NLOS_SPREADS = (0.6, 0.8, 1.0)
LOS_SPREADS = (0.05, 0.1, 0.15)
CLUSTER_POWER_SPLIT = (0.5, 0.3, 0.2)

PRESET_NAMES = ("iid", "nlos", "los", "paper-A", "paper-B", "paper-C", "paper-D",
                "fig2", "fig3", "fig4", "fig5", "fig6")


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully validated simulation scenario."""

    seed: int
    geometry: ArrayGeometry
    users: tuple
    grid: ResourceGrid = ResourceGrid()
    correlation: CorrelationSpec = CorrelationSpec.none()
    realizations: int = 1
    outputs: tuple = ()
    bins: int = DEFAULT_BINS

    def __post_init__(self):
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2 ** 64):
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        users = tuple(self.users)
        object.__setattr__(self, "users", users)
        if len(users) < 1:
            raise ValueError("at least one user required")
        if not (isinstance(self.realizations, (int, np.integer)) and self.realizations >= 1):
            raise ValueError(f"realizations must be a positive integer, got {self.realizations!r}")
        seen = []
        for name in self.outputs:
            if name not in ARTIFACT_NAMES:
                raise ValueError(f"unknown output {name!r}; valid outputs: {ARTIFACT_NAMES}")
            if name not in seen:
                seen.append(name)
        object.__setattr__(self, "outputs", tuple(seen))
        if self.bins < 1:
            raise ValueError(f"bins must be >= 1, got {self.bins!r}")
        if self.correlation.mode == "time" and self.correlation.length != self.grid.t_max:
            raise ValueError("correlation.length must equal grid.t_max for mode 'time'")
        if self.correlation.mode == "frequency" and self.correlation.length != self.grid.f_max:
            raise ValueError("correlation.length must equal grid.f_max for mode 'frequency'")
        k = len(users)
        if k < 2 and any(o in self.outputs for o in ("correlation-matrix", "cross-correlation")):
            raise ValueError("correlation outputs need at least two users")

    @property
    def n_users(self) -> int:
        return len(self.users)

    def mean_link_power(self) -> float:
        """Configured average per-link power, mean over antennas and users."""
        n = self.geometry.n_antennas
        return float(np.mean([u.total_power(n).mean() for u in self.users]))


@dataclass(frozen=True)
class ReportBundle:
    """Computed artifacts of one scenario run, keyed by artifact name."""

    config: ScenarioConfig
    artifacts: dict
    files: Optional[dict] = None
    manifest: Optional[tuple] = None


# ---------------------------------------------------------------------------
# configuration documents

def _require_keys(mapping: dict, allowed: dict, path: str) -> dict:
    out = {}
    for key, value in mapping.items():
        if key not in allowed:
            raise ConfigError(f"{path}: unknown key {key!r} (allowed: {sorted(allowed)})")
        out[key] = value
    for key, required in allowed.items():
        if required and key not in mapping:
            raise ConfigError(f"{path}: missing required key {key!r}")
    return out


def _cluster_from_dict(d: dict, path: str) -> ClusterSpec:
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: cluster must be an object")
    d = _require_keys(d, {"direction": True, "spread_fraction": True, "mean_power": False},
                      path)
    direction = d["direction"]
    if isinstance(direction, str) and direction != RANDOM_DIRECTION:
        raise ConfigError(f"{path}.direction: must be an angle in [0, pi) or "
                          f"{RANDOM_DIRECTION!r}")
    try:
        return ClusterSpec(direction=direction,
                           spread_fraction=d["spread_fraction"],
                           mean_power=d.get("mean_power", 1.0))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _correlation_from_dict(d: dict, path: str) -> CorrelationSpec:
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: correlation must be an object")
    mode = d.get("mode", "none")
    try:
        if mode == "none":
            _require_keys(d, {"mode": False}, path)
            return CorrelationSpec.none()
        model = d.get("model", "exponential")
        if model == "exponential":
            d = _require_keys(d, {"mode": True, "model": False, "rho": True,
                                  "length": True}, path)
            return CorrelationSpec.exponential(mode, d["rho"], d["length"])
        if model == "custom":
            d = _require_keys(d, {"mode": True, "model": True, "matrix": True}, path)
            spec = CorrelationSpec.custom(mode, np.asarray(d["matrix"], dtype=float))
            build_covariance(spec)  # eager Hermitian/diagonal/PSD validation
            return spec
        raise ConfigError(f"{path}.model: must be 'exponential' or 'custom', got {model!r}")
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def config_from_dict(doc: dict) -> ScenarioConfig:
    """Build a validated ScenarioConfig from a JSON-compatible dictionary."""
    if not isinstance(doc, dict):
        raise ConfigError("config: document must be a JSON object")
    if "preset" in doc:
        doc = _require_keys(doc, {"preset": True}, "config")
        return expand_preset(doc["preset"])
    doc = _require_keys(doc, {"seed": True, "geometry": True, "users": True,
                              "grid": False, "correlation": False,
                              "realizations": True, "outputs": False,
                              "bins": False}, "config")
    geo = doc["geometry"]
    if not isinstance(geo, dict):
        raise ConfigError("config.geometry: must be an object")
    geo = _require_keys(geo, {"n_antennas": True, "spacing_ratio": False},
                        "config.geometry")
    try:
        geometry = ArrayGeometry(n_antennas=geo["n_antennas"],
                                 spacing_ratio=geo.get("spacing_ratio", 0.25))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"config.geometry: {exc}") from exc
    if not isinstance(doc["users"], list) or not doc["users"]:
        raise ConfigError("config.users: must be a non-empty list")
    users = []
    for j, user_doc in enumerate(doc["users"]):
        path = f"config.users[{j}]"
        if not isinstance(user_doc, dict):
            raise ConfigError(f"{path}: user must be an object")
        user_doc = _require_keys(user_doc, {"clusters": True}, path)
        if not isinstance(user_doc["clusters"], list) or not user_doc["clusters"]:
            raise ConfigError(f"{path}.clusters: must be a non-empty list")
        clusters = tuple(_cluster_from_dict(c, f"{path}.clusters[{i}]")
                         for i, c in enumerate(user_doc["clusters"]))
        try:
            users.append(UserSpec(clusters=clusters))
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    grid_doc = doc.get("grid", {})
    if not isinstance(grid_doc, dict):
        raise ConfigError("config.grid: must be an object")
    grid_doc = _require_keys(grid_doc, {"t_max": False, "f_max": False,
                                        "symbols_per_rb": False}, "config.grid")
    try:
        grid = ResourceGrid(t_max=grid_doc.get("t_max", 1),
                            f_max=grid_doc.get("f_max", 1),
                            symbols_per_rb=grid_doc.get("symbols_per_rb", 1))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"config.grid: {exc}") from exc
    correlation = _correlation_from_dict(doc.get("correlation", {"mode": "none"}),
                                         "config.correlation")
    outputs = doc.get("outputs", [])
    if not isinstance(outputs, list):
        raise ConfigError("config.outputs: must be a list of artifact names")
    try:
        return ScenarioConfig(seed=doc["seed"], geometry=geometry, users=tuple(users),
                              grid=grid, correlation=correlation,
                              realizations=doc["realizations"],
                              outputs=tuple(outputs), bins=doc.get("bins", DEFAULT_BINS))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"config: {exc}") from exc


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a JSON scenario document.

    Syntax errors carry the line and column; semantic errors name the
    offending field and the violated constraint.  Unknown keys are errors.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"syntax error at line {exc.lineno}, column {exc.colno}: "
                          f"{exc.msg}") from exc
    return config_from_dict(doc)


def _cluster_to_dict(cluster: ClusterSpec) -> dict:
    power = cluster.mean_power
    return {"direction": cluster.direction,
            "spread_fraction": cluster.spread_fraction,
            "mean_power": list(power) if isinstance(power, tuple) else power}


def config_to_dict(config: ScenarioConfig) -> dict:
    """JSON-compatible echo of a config; parsing it reproduces the config."""
    doc = {
        "seed": int(config.seed),
        "geometry": {"n_antennas": int(config.geometry.n_antennas),
                     "spacing_ratio": float(config.geometry.spacing_ratio)},
        "users": [{"clusters": [_cluster_to_dict(c) for c in u.clusters]}
                  for u in config.users],
        "grid": {"t_max": int(config.grid.t_max), "f_max": int(config.grid.f_max),
                 "symbols_per_rb": int(config.grid.symbols_per_rb)},
        "realizations": int(config.realizations),
        "outputs": list(config.outputs),
        "bins": int(config.bins),
    }
    corr = config.correlation
    if corr.mode == "none":
        doc["correlation"] = {"mode": "none"}
    elif corr.rho is not None:
        doc["correlation"] = {"mode": corr.mode, "model": "exponential",
                              "rho": corr.rho, "length": int(corr.length)}
    else:
        doc["correlation"] = {"mode": corr.mode, "model": "custom",
                              "matrix": [[float(x) for x in row] for row in corr.matrix]}
    return doc


# ---------------------------------------------------------------------------
# presets

def _scattered_directions(principals, offsets, spreads):
    th = np.mod(np.asarray(principals)[:, None]
                + np.asarray(spreads)[None, :] * np.asarray(offsets), np.pi)
    return th


def _validation_users(principals, offsets, spreads, n_antennas,
                      power_ramp: bool = False):
    directions = _scattered_directions(principals, offsets, spreads)
    ramp = np.linspace(0.5, 1.5, n_antennas)
    users = []
    for j in range(len(principals)):
        clusters = []
        for c, s in enumerate(spreads):
            power = CLUSTER_POWER_SPLIT[c] * ramp if power_ramp else CLUSTER_POWER_SPLIT[c]
            clusters.append(ClusterSpec(direction=float(directions[j, c]),
                                        spread_fraction=s, mean_power=power))
        users.append(UserSpec(clusters=tuple(clusters)))
    return tuple(users)


def _paper_matrix_config(seed, n_antennas, spreads) -> ScenarioConfig:
    return ScenarioConfig(
        seed=seed,
        geometry=ArrayGeometry(n_antennas=n_antennas),
        users=_validation_users(_K3_PRINCIPAL, _K3_OFFSETS, spreads, n_antennas),
        realizations=1000,
        outputs=("correlation-matrix",),
    )


def _k6_config(seed, spreads, outputs, power_ramp=False) -> ScenarioConfig:
    n = 128
    return ScenarioConfig(
        seed=seed,
        geometry=ArrayGeometry(n_antennas=n),
        users=_validation_users(_K6_PRINCIPAL, _K6_OFFSETS, spreads, n,
                                power_ramp=power_ramp),
        realizations=1000,
        outputs=outputs,
    )


def _ring_config(seed, spread) -> ScenarioConfig:
    user = UserSpec(clusters=(ClusterSpec(direction=np.pi / 3,
                                          spread_fraction=spread, mean_power=1.0),))
    return ScenarioConfig(seed=seed, geometry=ArrayGeometry(n_antennas=128),
                          users=(user,), realizations=1000, outputs=("histogram",))


def expand_preset(name: str, seed: int = DEFAULT_PRESET_SEED) -> ScenarioConfig:
    """Expand a named preset into a full scenario configuration.

    The iid / nlos / los family and the validation scenarios paper-A..D use
    three clusters per user with power split 0.5/0.3/0.2; the paper-A/B and
    paper-C/D pairs differ only in the number of antennas (128 vs 20) and in
    the spread fractions (NLOS 0.6/0.8/1.0 vs LOS 0.05/0.1/0.15).  fig2/fig3
    are single-user ring histogram scenarios, fig4 draws two single-cluster
    users with fresh random directions per realization, fig5 emits the
    eigenvalue CDF and fig6 a power profile with a per-antenna power ramp.
    """
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {name!r}; valid presets: {PRESET_NAMES}")
    if name == "paper-A":
        return _paper_matrix_config(seed, 128, NLOS_SPREADS)
    if name == "paper-B":
        return _paper_matrix_config(seed, 128, LOS_SPREADS)
    if name == "paper-C":
        return _paper_matrix_config(seed, 20, NLOS_SPREADS)
    if name == "paper-D":
        return _paper_matrix_config(seed, 20, LOS_SPREADS)
    if name == "nlos":
        return _k6_config(seed, NLOS_SPREADS, ("correlation-matrix", "eigencdf"))
    if name == "los":
        return _k6_config(seed, LOS_SPREADS, ("correlation-matrix", "eigencdf"))
    if name == "iid":
        users = tuple(
            UserSpec(clusters=tuple(ClusterSpec(direction=RANDOM_DIRECTION,
                                                spread_fraction=1.0,
                                                mean_power=p)
                                    for p in CLUSTER_POWER_SPLIT))
            for _ in range(6))
        return ScenarioConfig(seed=seed, geometry=ArrayGeometry(n_antennas=128),
                              users=users, realizations=1000,
                              outputs=("eigencdf", "cross-correlation"))
    if name == "fig2":
        return _ring_config(seed, 0.1)
    if name == "fig3":
        return _ring_config(seed, 0.5)
    if name == "fig4":
        users = tuple(UserSpec(clusters=(ClusterSpec(direction=RANDOM_DIRECTION,
                                                     spread_fraction=0.1,
                                                     mean_power=1.0),))
                      for _ in range(2))
        return ScenarioConfig(seed=seed, geometry=ArrayGeometry(n_antennas=128),
                              users=users, realizations=2000,
                              outputs=("cross-correlation",))
    if name == "fig5":
        return _k6_config(seed, NLOS_SPREADS, ("eigencdf",))
    return _k6_config(seed, NLOS_SPREADS, ("power-profile",), power_ramp=True)


# ---------------------------------------------------------------------------
# orchestration

def _realize(config: ScenarioConfig, index: int, needs: set) -> dict:
    """Compute one realization's artifact contributions.

    Draw order from substream(seed, index): per (user, cluster) in
    lexicographic order, the direction (only for "random" clusters) and then
    the cluster phase; afterwards per (user, cluster) the link grids.  This
    order is the reproducibility contract.
    """
    rng = substream(config.seed, index)
    n = config.geometry.n_antennas
    pairs = []
    for user in config.users:
        row = []
        for cluster in user.clusters:
            if cluster.is_random_direction:
                cluster = replace(cluster, direction=draw_direction(rng))
            phase = rng.uniform(0.0, 2.0 * np.pi)
            row.append(build_spatial_pair(cluster, config.geometry, phase_offset=phase))
        pairs.append(row)
    qgrids = [[sample_q_block(config.correlation, config.grid, n, rng)
               for _ in user.clusters] for user in config.users]
    blocks = [assemble_channel(pairs, qgrids, rb=(t, f))
              for t in range(1, config.grid.t_max + 1)
              for f in range(1, config.grid.f_max + 1)]

    out = {}
    if "histogram" in needs:
        out["samples"] = np.concatenate([b.h.ravel() for b in blocks])
    if "cross-correlation" in needs:
        out["offdiag"] = np.concatenate([analytics.gram(b).offdiag_mags for b in blocks])
    if "eigencdf" in needs:
        out["eigen"] = np.concatenate(
            [analytics.eigenvalues_hermitian(analytics.gram(b).g) for b in blocks])
    if "power-profile" in needs:
        out["power"] = sum(np.abs(b.h) ** 2 for b in blocks) / len(blocks)
    if "correlation-matrix" in needs:
        out["xcorr"] = sum(analytics.pairwise_correlation(b) for b in blocks) / len(blocks)
    if "raw-channel" in needs:
        out["raw"] = [(index, b.rb[0], b.rb[1], b.h) for b in blocks]
    return out


def run_scenario(config: ScenarioConfig, out_dir=None, threads: int = 1) -> ReportBundle:
    """Run a scenario and compute its requested artifacts.

    Realizations are independent substreams of the config seed; with
    ``threads > 1`` they are computed concurrently but reduced in
    realization order, so artifacts are bitwise identical to a
    single-threaded run.  With ``out_dir`` set, artifacts are also written
    as CSV/SVG files plus a manifest (see :mod:`blockfade.emit`).
    """
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads!r}")
    needs = set(config.outputs)
    indices = range(config.realizations)
    if threads == 1:
        results = [_realize(config, m, needs) for m in indices]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda m: _realize(config, m, needs), indices))

    artifacts = {}
    if "histogram" in needs:
        samples = np.concatenate([r["samples"] for r in results])
        artifacts["histogram"] = analytics.coefficient_histogram(samples, config.bins)
    if "cross-correlation" in needs:
        mags = np.concatenate([r["offdiag"] for r in results])
        top = max(1.0, float(mags.max()))
        edges = np.linspace(0.0, top, config.bins + 1)
        counts, _ = np.histogram(mags, bins=edges)
        artifacts["cross-correlation"] = {"edges": edges, "counts": counts.astype(np.int64),
                                          "magnitudes": mags}
    if "eigencdf" in needs:
        eigen = np.concatenate([r["eigen"] for r in results])
        artifacts["eigencdf"] = analytics.empirical_cdf(eigen / config.mean_link_power())
    if "power-profile" in needs:
        acc = np.zeros((config.geometry.n_antennas, config.n_users))
        for r in results:
            acc += r["power"]
        artifacts["power-profile"] = acc / len(results)
    if "correlation-matrix" in needs:
        acc = np.zeros((config.n_users, config.n_users))
        for r in results:
            acc += r["xcorr"]
        acc /= len(results)
        acc = 0.5 * (acc + acc.T)
        np.fill_diagonal(acc, 1.0)
        artifacts["correlation-matrix"] = analytics.UserCorrelationMatrix(values=acc)
    if "raw-channel" in needs:
        artifacts["raw-channel"] = [row for r in results for row in r["raw"]]

    bundle = ReportBundle(config=config, artifacts=artifacts)
    if out_dir is not None:
        from .emit import write_bundle
        files, manifest = write_bundle(bundle, out_dir)
        bundle = ReportBundle(config=config, artifacts=artifacts,
                              files=files, manifest=manifest)
    return bundle
