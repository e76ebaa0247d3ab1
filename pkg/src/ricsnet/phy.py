"""Surface phase control and link-quality math.

The surface reflects toward the base station and transmits toward the V2V
receivers at the same time.  Element ``k`` applies ``sqrt(beta_r)*e^{j a_k}``
to the reflected wave and ``psi*sqrt(beta_t)*e^{j b_k}`` to the transmitted
wave; elements are grouped into equal sub-blocks sharing one (a, b) pair
drawn from a uniform phase codebook.

Uplink quality for AV ``u``:

    sinr = P_u * |h_ub[u] + sum_k h_rb[k]*theta_r[k]*h_ur[u,k]|^2
           / (sum_v omega[u,v] * P_t * |h_vb[v]|^2 + noise)

V2V quality for pair ``v`` (conjugate on the surface->receiver leg):

    sinr = P_t * |h_v[v]|^2
           / (sum_u omega[u,v] * P_u
              * |h_uv[u,v] + sum_k conj(h_rv[v,k])*theta_t[k]*h_ur[u,k]|^2
              + noise)

``omega`` is the binary sharing matrix (AV channel u reused by V2V v).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import Csi, MobilityState, draw_cell_csi_batch
from .config import FadingParams, PhyConfig, RicsConfig


@dataclass
class RicsAction:
    """Discrete phase choice per sub-block: codebook indices for both modes."""

    reflect_idx: np.ndarray    # (Q,) ints in [0, 2^phase_bits)
    transmit_idx: np.ndarray   # (Q,)

    @staticmethod
    def from_flat(flat: np.ndarray, phase_bits: int) -> "RicsAction":
        """Decode joint per-sub-block indices a*2^h + b into (reflect, transmit)."""
        flat = np.asarray(flat, dtype=int)
        n = 1 << phase_bits
        return RicsAction(reflect_idx=flat // n, transmit_idx=flat % n)

    def to_flat(self, phase_bits: int) -> np.ndarray:
        return self.reflect_idx * (1 << phase_bits) + self.transmit_idx


def phase_codebook(phase_bits: int) -> np.ndarray:
    """Uniform codebook {2*pi*i / 2^bits : i = 0..2^bits-1}."""
    if phase_bits < 1:
        raise ValueError("phase_codebook: phase_bits must be >= 1")
    n = 1 << phase_bits
    return 2.0 * np.pi * np.arange(n) / n


def expand_action(action: RicsAction, cfg: RicsConfig) -> tuple[np.ndarray, np.ndarray]:
    """Per-element coefficient vectors (theta_r, theta_t) for one surface.

    Element k in sub-block q gets sqrt(beta_r)*e^{j reflect_phase_q} and
    psi*sqrt(beta_t)*e^{j transmit_phase_q}.
    """
    q_count = cfg.num_subblocks
    reflect = np.asarray(action.reflect_idx, dtype=int)
    transmit = np.asarray(action.transmit_idx, dtype=int)
    if reflect.shape != (q_count,) or transmit.shape != (q_count,):
        raise ValueError(f"expand_action: expected {q_count} sub-block indices")
    codebook = phase_codebook(cfg.phase_bits)
    if reflect.min() < 0 or reflect.max() >= codebook.size \
            or transmit.min() < 0 or transmit.max() >= codebook.size:
        raise ValueError("expand_action: phase index outside codebook")
    block = cfg.num_elements // q_count
    phases_r = np.repeat(codebook[reflect], block)
    phases_t = np.repeat(codebook[transmit], block)
    theta_r = np.sqrt(cfg.beta_r) * np.exp(1j * phases_r)
    theta_t = cfg.psi * np.sqrt(cfg.beta_t) * np.exp(1j * phases_t)
    return theta_r, theta_t


def composite_gain(direct: complex, h_out: np.ndarray, theta: np.ndarray,
                   h_in: np.ndarray) -> complex:
    """Direct path plus the element-wise surface cascade sum."""
    h_out = np.asarray(h_out)
    if h_out.shape[-1] != np.asarray(theta).shape[-1] \
            or np.asarray(h_in).shape[-1] != np.asarray(theta).shape[-1]:
        raise ValueError("composite_gain: mismatched element counts")
    return direct + np.sum(h_out * theta * h_in, axis=-1)


def sinr_v2i(csi: Csi, theta_r: np.ndarray, omega: np.ndarray,
             phy: PhyConfig, u: int) -> float:
    """Uplink SINR of AV u under sharing matrix omega."""
    gain = composite_gain(csi.h_ub[u], csi.h_rb, theta_r, csi.h_ur[u])
    signal = phy.p_av_w * np.abs(gain) ** 2
    interference = 0.0
    if csi.h_vb.size:
        interference = phy.p_v2v_w * np.sum(omega[u] * np.abs(csi.h_vb) ** 2)
    return float(signal / (interference + phy.noise_w))


def sinr_v2v(csi: Csi, theta_t: np.ndarray, omega: np.ndarray,
             phy: PhyConfig, v: int) -> float:
    """V2V SINR of pair v; interferers are the AVs whose channels it reuses."""
    signal = phy.p_v2v_w * np.abs(csi.h_v[v]) ** 2
    cascade = composite_gain(csi.h_uv[:, v], np.conj(csi.h_rv[v]),
                             theta_t, csi.h_ur)           # (U,)
    interference = phy.p_av_w * np.sum(omega[:, v] * np.abs(cascade) ** 2)
    return float(signal / (interference + phy.noise_w))


def _sinr_v2v_batch(batch: Csi, theta_t: np.ndarray, omega: np.ndarray,
                    phy: PhyConfig) -> np.ndarray:
    """(n, V) SINR matrix over a batch of channel realizations."""
    cascade = batch.h_uv + np.einsum("nvk,k,nuk->nuv", np.conj(batch.h_rv),
                                     theta_t, batch.h_ur)
    interference = phy.p_av_w * np.einsum("uv,nuv->nv", omega,
                                          np.abs(cascade) ** 2)
    signal = phy.p_v2v_w * np.abs(batch.h_v) ** 2
    return signal / (interference + phy.noise_w)


def mean_sinr_v2v(state: MobilityState, cell: int, theta_t: np.ndarray,
                  omega: np.ndarray, fading: FadingParams, phy: PhyConfig,
                  rng: np.random.Generator,
                  batch: Csi | None = None) -> np.ndarray:
    """Per-V2V mean SINR over ``n_mc`` small-scale redraws, geometry frozen.

    Pass a precomputed ``batch`` (from ``draw_cell_csi_batch``) to evaluate
    many candidate actions against the same realizations.
    """
    if batch is None:
        batch = draw_cell_csi_batch(state, cell, fading, rng, phy.n_mc)
    if batch.h_v.shape[-1] == 0:
        return np.zeros(0)
    return _sinr_v2v_batch(batch, theta_t, omega, phy).mean(axis=0)


def rate_v2i(gamma: float, phy: PhyConfig, num_avs: int) -> float:
    """Uplink rate in bit/s with the band split equally over the cell's AVs."""
    if num_avs < 1:
        raise ValueError("rate_v2i: num_avs must be >= 1")
    if gamma < 0:
        raise ValueError("rate_v2i: gamma must be >= 0")
    return phy.bandwidth_hz / num_avs * float(np.log2(1.0 + gamma))


def rate_v2v(gamma: float, phy: PhyConfig, num_pairs: int) -> float:
    """V2V rate in bit/s with the band split over the cell's pairs."""
    if num_pairs < 1:
        raise ValueError("rate_v2v: num_pairs must be >= 1")
    if gamma < 0:
        raise ValueError("rate_v2v: gamma must be >= 0")
    return phy.bandwidth_hz / num_pairs * float(np.log2(1.0 + gamma))


def smooth_step(x, delta: float):
    """Numerically stable logistic 1 / (1 + e^{-delta*x})."""
    scalar = np.asarray(x).ndim == 0
    z = delta * np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return float(out[0]) if scalar else out


def outage_threshold(phy: PhyConfig) -> float:
    """Mean-SINR level whose logistic outage mass equals the target.

    gamma_th + ln(1/p - 1)/varpi: keeping the mean SINR above this value
    keeps the smoothed outage probability below ``p_outage``.
    """
    if not (0.0 < phy.p_outage < 1.0):
        raise ValueError("outage_threshold: p_outage must lie in (0, 1)")
    return phy.gamma_th + np.log(1.0 / phy.p_outage - 1.0) / phy.varpi
