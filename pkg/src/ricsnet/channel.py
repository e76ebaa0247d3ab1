"""Cell geometry, vehicle mobility, and channel state generation.

World frame: the base station is at the origin.  Cell ``c`` of ``C`` has
angle ``phi_c = 2*pi*c/C``; its surface sits at ``rics_radius`` along that
angle with its array axis tangential to the placement circle, and its vehicle
zone is the base rectangle ``x in [zone_near, zone_near+zone_length]``,
``y in [-zone_width/2, +zone_width/2]`` rotated by ``phi_c``.  Vehicles are
tracked in zone-local coordinates (column 0 along the road axis, column 1
across) and drive along the long axis with a fixed per-episode heading sign,
reflecting at the zone ends.

All functions are pure: they take explicit state plus an injected
``numpy.random.Generator`` and never mutate their inputs.

Channel draw order (fixed for reproducibility, AV-related draws first so
runs that differ only in the V2V population share AV realizations):
surface->BS, AV->surface, AV->BS, then surface->V2V receiver, V2V pair,
AV->V2V receiver, V2V->BS.  Deterministic mode consumes no randomness.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .config import FadingParams, TopologyConfig

# Rician factors at or above this are treated as pure line of sight.
PURE_LOS_RICIAN = 1e12


@dataclass
class MobilityState:
    """Positions and headings of every mobile entity at one slot."""

    slot_index: int
    num_elements: int            # surface elements per cell
    zone_angles: np.ndarray      # (C,)
    zone_near: float
    zone_length: float
    rics_positions: np.ndarray   # (C, 2) world frame
    av_local: np.ndarray         # (C, U, 2)
    v2v_tx_local: np.ndarray     # (C, V, 2)
    v2v_rx_local: np.ndarray     # (C, V, 2)
    av_sign: np.ndarray          # (C, U)
    v2v_tx_sign: np.ndarray      # (C, V)
    v2v_rx_sign: np.ndarray      # (C, V)

    def _to_world(self, local: np.ndarray) -> np.ndarray:
        cos = np.cos(self.zone_angles)[:, None]
        sin = np.sin(self.zone_angles)[:, None]
        x = local[..., 0] + self.zone_near
        y = local[..., 1]
        return np.stack([cos * x - sin * y, sin * x + cos * y], axis=-1)

    @property
    def av_positions(self) -> np.ndarray:
        return self._to_world(self.av_local)

    @property
    def v2v_tx_positions(self) -> np.ndarray:
        return self._to_world(self.v2v_tx_local)

    @property
    def v2v_rx_positions(self) -> np.ndarray:
        return self._to_world(self.v2v_rx_local)


@dataclass
class Csi:
    """Complex channel gains for one cell and one slot.

    ``K``-element links carry one entry per surface element; direct links are
    scalars.  Batched draws prepend a realization axis to every array.
    """

    slot_index: int
    h_ur: np.ndarray   # (U, K)  AV -> surface
    h_ub: np.ndarray   # (U,)    AV -> BS direct
    h_rb: np.ndarray   # (K,)    surface -> BS
    h_rv: np.ndarray   # (V, K)  surface -> V2V receiver
    h_v: np.ndarray    # (V,)    V2V transmitter -> receiver
    h_uv: np.ndarray   # (U, V)  AV -> V2V receiver interference
    h_vb: np.ndarray   # (V,)    V2V transmitter -> BS interference


def path_gain(distance: float, params: FadingParams) -> float:
    """Amplitude gain sqrt(C0 * (d/d0)^(-alpha)); decays with distance."""
    if distance <= 0:
        raise ValueError("path_gain: distance must be > 0")
    ratio = distance / params.ref_distance
    return float(np.sqrt(params.ref_gain * ratio ** (-params.pathloss_exp)))


def ula_steering(angle: float, num_elements: int) -> np.ndarray:
    """Half-wavelength uniform linear array response exp(j*pi*k*sin(angle))."""
    if num_elements < 1:
        raise ValueError("ula_steering: num_elements must be >= 1")
    k = np.arange(num_elements)
    return np.exp(1j * np.pi * k * np.sin(angle))


def sample_rician(gain: float, zeta: float, los: np.ndarray,
                  rng: np.random.Generator, *, size=None,
                  deterministic: bool = False) -> np.ndarray:
    """Rician draw: gain * (sqrt(z/(1+z))*los + sqrt(1/(1+z))*g), g ~ CN(0,1).

    ``zeta >= PURE_LOS_RICIAN`` short-circuits to ``gain * los`` exactly.
    ``size`` prepends a batch shape to ``los``'s shape; ``deterministic``
    drops the scattered part without consuming randomness.
    """
    if zeta < 0:
        raise ValueError("sample_rician: zeta must be >= 0")
    shape = los.shape if size is None else (int(size),) + los.shape
    if zeta >= PURE_LOS_RICIAN:
        return gain * np.broadcast_to(los, shape).astype(complex)
    if deterministic:
        return gain * np.sqrt(zeta / (1.0 + zeta)) \
            * np.broadcast_to(los, shape).astype(complex)
    g = _cn_unit(rng, shape)
    return gain * (np.sqrt(zeta / (1.0 + zeta)) * los
                   + np.sqrt(1.0 / (1.0 + zeta)) * g)


def _cn_unit(rng: np.random.Generator, shape) -> np.ndarray:
    """Unit-variance circular complex Gaussian draws."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def init_positions(topology: TopologyConfig, rng: np.random.Generator) -> MobilityState:
    """Place surfaces on the ring and vehicles uniformly in each cell's zone.

    Draw order per category: AV positions, AV headings, then V2V transmitter
    and receiver positions and headings.
    """
    topology.validate()
    c_count, u_count, v_count = (topology.num_cells, topology.avs_per_cell,
                                 topology.v2v_per_cell)
    angles = 2.0 * np.pi * np.arange(c_count) / c_count
    rics = topology.rics_radius * np.stack([np.cos(angles), np.sin(angles)], axis=-1)

    def draw_local(n):
        pts = np.empty((c_count, n, 2))
        pts[..., 0] = rng.uniform(0.0, topology.zone_length, size=(c_count, n))
        pts[..., 1] = rng.uniform(-topology.zone_width / 2.0,
                                  topology.zone_width / 2.0, size=(c_count, n))
        return pts

    def draw_signs(n):
        return np.where(rng.random(size=(c_count, n)) < 0.5, -1.0, 1.0)

    av_local = draw_local(u_count)
    av_sign = draw_signs(u_count)
    v2v_tx_local = draw_local(v_count)
    v2v_tx_sign = draw_signs(v_count)
    v2v_rx_local = draw_local(v_count)
    v2v_rx_sign = draw_signs(v_count)
    return MobilityState(slot_index=0, num_elements=topology.rics_elements,
                         zone_angles=angles, zone_near=topology.zone_near,
                         zone_length=topology.zone_length,
                         rics_positions=rics, av_local=av_local,
                         v2v_tx_local=v2v_tx_local, v2v_rx_local=v2v_rx_local,
                         av_sign=av_sign, v2v_tx_sign=v2v_tx_sign,
                         v2v_rx_sign=v2v_rx_sign)


def _advance_axis(x: np.ndarray, sign: np.ndarray, step: float, length: float):
    """Move along the road axis with reflection at 0 and ``length``."""
    pos = x + sign * step
    sgn = sign.copy()
    # one slot moves well under a zone length, so one reflection suffices
    over = pos > length
    pos = np.where(over, 2.0 * length - pos, pos)
    sgn = np.where(over, -sgn, sgn)
    under = pos < 0.0
    pos = np.where(under, -pos, pos)
    sgn = np.where(under, -sgn, sgn)
    return pos, sgn


def advance_slot(state: MobilityState, topology: TopologyConfig) -> MobilityState:
    """One mobility step: every vehicle advances speed*slot along the road."""
    step = topology.vehicle_speed * topology.slot_duration
    length = state.zone_length

    def move(local, sign):
        pos, sgn = _advance_axis(local[..., 0], sign, step, length)
        out = local.copy()
        out[..., 0] = pos
        return out, sgn

    av_local, av_sign = move(state.av_local, state.av_sign)
    tx_local, tx_sign = move(state.v2v_tx_local, state.v2v_tx_sign)
    rx_local, rx_sign = move(state.v2v_rx_local, state.v2v_rx_sign)
    return replace(state, slot_index=state.slot_index + 1, av_local=av_local,
                   v2v_tx_local=tx_local, v2v_rx_local=rx_local,
                   av_sign=av_sign, v2v_tx_sign=tx_sign, v2v_rx_sign=rx_sign)


def _distances(points: np.ndarray, anchor: np.ndarray, floor: float) -> np.ndarray:
    d = np.linalg.norm(points - anchor, axis=-1)
    # near-field guard: never extrapolate inside the reference distance
    return np.maximum(d, floor)


def _sin_toward(points: np.ndarray, anchor: np.ndarray, axis: np.ndarray) -> np.ndarray:
    """Direction cosine of (points - anchor) along the array axis."""
    delta = points - anchor
    norm = np.maximum(np.linalg.norm(delta, axis=-1), 1e-12)
    return np.clip((delta @ axis) / norm, -1.0, 1.0)


def _gains(distances: np.ndarray, params: FadingParams) -> np.ndarray:
    ratio = distances / params.ref_distance
    return np.sqrt(params.ref_gain * ratio ** (-params.pathloss_exp))


def _steering_rows(sines: np.ndarray, num_elements: int) -> np.ndarray:
    """Stacked array responses, one row per direction cosine."""
    k = np.arange(num_elements)
    return np.exp(1j * np.pi * np.asarray(sines)[..., None] * k)


def draw_cell_csi_batch(state: MobilityState, cell: int, params: FadingParams,
                        rng: np.random.Generator, n: int) -> Csi:
    """Draw ``n`` independent small-scale realizations for one cell.

    Geometry (distances, angles, path gains) is frozen; only the small-scale
    parts are redrawn.  Arrays carry a leading batch axis of length ``n``.
    """
    if n < 1:
        raise ValueError("draw_cell_csi_batch: n must be >= 1")
    angle = state.zone_angles[cell]
    axis = np.array([-np.sin(angle), np.cos(angle)])   # array axis, tangential
    rics = state.rics_positions[cell]
    bs = np.zeros(2)
    floor = params.ref_distance
    k_count = state.num_elements
    det = params.deterministic

    av = state.av_positions[cell]
    tx = state.v2v_tx_positions[cell]
    rx = state.v2v_rx_positions[cell]
    u_count = av.shape[0]
    v_count = rx.shape[0]

    # ---- links through the surface (Rician, steering line of sight) ----
    los_rb = _steering_rows(_sin_toward(bs, rics, axis), k_count)
    gain_rb = path_gain(float(max(np.linalg.norm(rics - bs), floor)), params)
    h_rb = sample_rician(gain_rb, params.rician_rb, los_rb, rng, size=n,
                         deterministic=det)

    los_ur = _steering_rows(_sin_toward(av, rics, axis), k_count)   # (U, K)
    gain_ur = _gains(_distances(av, rics, floor), params)[:, None]
    h_ur = sample_rician(1.0, params.rician_ur, los_ur, rng, size=n,
                         deterministic=det) * gain_ur

    # ---- AV direct link (Rayleigh) ----
    gain_ub = _gains(_distances(av, bs, floor), params)
    h_ub = gain_ub * _unit_or_ones(rng, (n, u_count), det)

    # ---- V2V-side links ----
    if v_count > 0:
        los_rv = _steering_rows(_sin_toward(rx, rics, axis), k_count)
        gain_rv = _gains(_distances(rx, rics, floor), params)[:, None]
        h_rv = sample_rician(1.0, params.rician_rv, los_rv, rng, size=n,
                             deterministic=det) * gain_rv
        gain_v = _gains(_distances(rx, tx, floor), params)
        h_v = gain_v * _unit_or_ones(rng, (n, v_count), det)
        d_uv = np.linalg.norm(av[:, None, :] - rx[None, :, :], axis=-1)
        gain_uv = _gains(np.maximum(d_uv, floor), params)
        h_uv = gain_uv * _unit_or_ones(rng, (n, u_count, v_count), det)
        gain_vb = _gains(_distances(tx, bs, floor), params)
        h_vb = gain_vb * _unit_or_ones(rng, (n, v_count), det)
    else:
        h_rv = np.zeros((n, 0, k_count), dtype=complex)
        h_v = np.zeros((n, 0), dtype=complex)
        h_uv = np.zeros((n, u_count, 0), dtype=complex)
        h_vb = np.zeros((n, 0), dtype=complex)

    return Csi(slot_index=state.slot_index, h_ur=h_ur, h_ub=h_ub, h_rb=h_rb,
               h_rv=h_rv, h_v=h_v, h_uv=h_uv, h_vb=h_vb)


def _unit_or_ones(rng, shape, deterministic):
    if deterministic:
        return np.ones(shape, dtype=complex)
    return _cn_unit(rng, shape)


def draw_cell_csi(state: MobilityState, cell: int, params: FadingParams,
                  rng: np.random.Generator) -> Csi:
    """Single realization for one cell (batch of 1, squeezed)."""
    batch = draw_cell_csi_batch(state, cell, params, rng, 1)
    return Csi(slot_index=batch.slot_index,
               h_ur=batch.h_ur[0], h_ub=batch.h_ub[0], h_rb=batch.h_rb[0],
               h_rv=batch.h_rv[0], h_v=batch.h_v[0], h_uv=batch.h_uv[0],
               h_vb=batch.h_vb[0])


def draw_csi(state: MobilityState, params: FadingParams,
             rng: np.random.Generator) -> list[Csi]:
    """All cells' channel state for the current slot, cell-major draw order."""
    return [draw_cell_csi(state, c, params, rng)
            for c in range(state.zone_angles.shape[0])]
