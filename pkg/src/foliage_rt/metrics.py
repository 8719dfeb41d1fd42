"""Band-limited CIRs, power delay profiles and scalar channel statistics."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .channel import PathContribution

SINC_HALF_WIDTH = 64
DEFAULT_GRID_LEN = 1024
DEFAULT_LEAD_TAPS = 32
NOISE_FLOOR_DBM = -130.0


@dataclass(frozen=True, eq=False)
class Cir:
    """Tapped delay line; tap ``k`` sits at delay ``tau0 + k * dtau``."""

    taps: np.ndarray
    tau0: float
    dtau: float
    f_c: float = float("nan")

    def __post_init__(self):
        if not self.dtau > 0:
            raise ValueError("tap spacing must be positive")
        taps = np.asarray(self.taps, dtype=complex)
        if not np.all(np.isfinite(taps)):
            raise ValueError("CIR taps must be finite")
        object.__setattr__(self, "taps", taps)

    @property
    def delays(self) -> np.ndarray:
        return self.tau0 + self.dtau * np.arange(len(self.taps))

    def pdp(self) -> "Pdp":
        return Pdp(np.abs(self.taps) ** 2, self.tau0, self.dtau, self.f_c)

    def same_grid(self, other) -> bool:
        return (
            len(self.taps) == len(other.taps if isinstance(other, Cir) else other.power)
            and self.tau0 == other.tau0
            and self.dtau == other.dtau
        )


@dataclass(frozen=True, eq=False)
class Pdp:
    power: np.ndarray
    tau0: float
    dtau: float
    f_c: float = float("nan")

    def __post_init__(self):
        power = np.asarray(self.power, dtype=float)
        if np.any(power < 0):
            raise ValueError("PDP power must be non-negative")
        object.__setattr__(self, "power", power)

    @property
    def delays(self) -> np.ndarray:
        return self.tau0 + self.dtau * np.arange(len(self.power))


@dataclass(frozen=True)
class ChannelStats:
    pl_db: float
    ds_s: float
    mean_delay_s: float


def assemble_cir(
    paths: Sequence[PathContribution],
    bw: float,
    grid_len: int = DEFAULT_GRID_LEN,
    tau0: float | None = None,
    f_c: float = float("nan"),
    half_width: int = SINC_HALF_WIDTH,
) -> Cir:
    """Band-limit a path list onto a ``1/bw`` delay grid.

    Each path deposits ``a_n * sinc(bw * (tau_k - tau_n))`` on the taps within
    ``half_width`` of its delay (rectangular truncation, no window).  The
    default origin is the earliest path delay minus ``DEFAULT_LEAD_TAPS`` taps.

    Raises:
        ValueError: if a path delay falls outside the grid.
    """
    if not bw > 0:
        raise ValueError("bandwidth must be positive")
    dtau = 1.0 / bw
    taps = np.zeros(grid_len, dtype=complex)
    if not paths:
        return Cir(taps, 0.0 if tau0 is None else tau0, dtau, f_c)
    tau = np.array([p.tau for p in paths])
    amp = np.array([p.amplitude for p in paths], dtype=complex)
    if tau0 is None:
        tau0 = float(tau.min()) - DEFAULT_LEAD_TAPS * dtau
    pos = (tau - tau0) / dtau
    bad = (pos < 0) | (pos > grid_len - 1)
    if bad.any():
        raise ValueError(
            f"path delay {tau[bad][0]:.6e} s lies outside the CIR grid "
            f"[{tau0:.6e}, {tau0 + (grid_len - 1) * dtau:.6e}] s"
        )
    centre = np.rint(pos).astype(int)
    offs = np.arange(-half_width, half_width + 1)
    k = centre[:, None] + offs[None, :]
    inside = (k >= 0) & (k < grid_len)
    contrib = amp[:, None] * np.sinc(k - pos[:, None])
    np.add.at(taps, k[inside], contrib[inside])
    return Cir(taps, tau0, dtau, f_c)


def path_loss_db(cir: Cir) -> float:
    """Total CIR energy in dB; ``-inf`` for an all-zero CIR."""
    if len(cir.taps) == 0:
        raise ValueError("empty CIR")
    energy = float(np.sum(np.abs(cir.taps) ** 2))
    return 10.0 * math.log10(energy) if energy > 0 else -math.inf


def mean_delay(pdp: Pdp) -> float:
    total = pdp.power.sum()
    if not total > 0:
        raise ValueError("mean delay undefined for a zero-power PDP")
    return float(np.sum(pdp.delays * pdp.power) / total)


def rms_delay_spread(pdp: Pdp) -> float:
    """Power-weighted standard deviation of delay.

    Raises:
        ValueError: if the PDP carries no power.
    """
    total = pdp.power.sum()
    if not total > 0:
        raise ValueError("delay spread undefined for a zero-power PDP")
    # Relative delays keep the second moment well-conditioned.
    rel = np.arange(len(pdp.power)) * pdp.dtau
    mean = np.sum(rel * pdp.power) / total
    return float(math.sqrt(max(np.sum((rel - mean) ** 2 * pdp.power) / total, 0.0)))


def channel_stats(cir: Cir) -> ChannelStats:
    pl = path_loss_db(cir)
    if math.isinf(pl):
        return ChannelStats(pl, float("nan"), float("nan"))
    pdp = cir.pdp()
    return ChannelStats(pl, rms_delay_spread(pdp), mean_delay(pdp))


def pdp_from_realizations(cirs: Sequence[Cir]) -> Pdp:
    """Empirical ``E|h|^2`` over realizations sharing one delay grid."""
    if not cirs:
        raise ValueError("need at least one CIR")
    ref = cirs[0]
    for c in cirs[1:]:
        if not ref.same_grid(c):
            raise ValueError("CIRs do not share a delay grid")
    # Running mean: exact when all realizations are identical.
    power = np.abs(ref.taps) ** 2
    for k, c in enumerate(cirs[1:], start=2):
        power = power + (np.abs(c.taps) ** 2 - power) / k
    return Pdp(power, ref.tau0, ref.dtau, ref.f_c)


def empirical_cdf(values: Iterable[float]) -> tuple[np.ndarray, np.ndarray]:
    """Right-continuous empirical CDF as ``(sorted_values, probabilities)``."""
    x = np.sort(np.asarray(list(values), dtype=float))
    if x.size == 0:
        raise ValueError("empirical CDF of an empty sample")
    return x, np.arange(1, x.size + 1) / x.size


def cdf_quantile(values: Iterable[float], q: float) -> float:
    """Smallest sample value ``x`` with ``F(x) >= q``."""
    x, p = empirical_cdf(values)
    return float(x[np.searchsorted(p, q - 1e-12)])


def cdf_median(values: Iterable[float]) -> float:
    return cdf_quantile(values, 0.5)


def rssi_dbm(cir: Cir, tx_power_dbm: float = 0.0, floor_dbm: float | None = NOISE_FLOOR_DBM) -> float:
    """Received power from taps at or above ``floor_dbm`` (all taps if ``None``)."""
    p = tx_power_dbm + 10.0 * np.log10(np.maximum(np.abs(cir.taps) ** 2, 1e-300))
    keep = np.ones(p.shape, bool) if floor_dbm is None else p >= floor_dbm
    total = float(np.sum(10.0 ** (p[keep] / 10.0)))
    return 10.0 * math.log10(total) if total > 0 else -math.inf


def write_cir_csv(path, cir: Cir) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tau_s", "re", "im"])
        for t, h in zip(cir.delays, cir.taps):
            w.writerow([repr(float(t)), repr(float(h.real)), repr(float(h.imag))])


def read_cir_csv(path, f_c: float = float("nan")) -> Cir:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    tau, re, im = data.T
    dtau = float(tau[1] - tau[0]) if len(tau) > 1 else 1.0
    return Cir(re + 1j * im, float(tau[0]), dtau, f_c)


def write_pdp_csv(path, pdp: Pdp) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tau_s", "power"])
        for t, p in zip(pdp.delays, pdp.power):
            w.writerow([repr(float(t)), repr(float(p))])
