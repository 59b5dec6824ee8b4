"""Radio layer: link budget, Rayleigh MCS selection, and service envelopes.

The channel is Rayleigh-faded with a static average SNR per UE, so the
instantaneous per-RB SNR is exponentially distributed and the probability
of each MCS level is a closed-form difference of exponentials. Service is
slotted: each RB serves n_sc * scs_hz * t_slot * eta bits per slot, and the
per-flow cumulative service process has an affine lower envelope whose rate
follows from the negative MGF of the per-slot served bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ScenarioParseError, ScenarioValidationError

_SPEED_OF_LIGHT = 299792458.0

# 4-bit CQI spectral efficiencies (bits per symbol-unit), lowest to highest.
_CQI_EFFICIENCIES = (
    0.1523, 0.2344, 0.3770, 0.6016, 0.8770,
    1.1758, 1.4766, 1.9141, 2.4063, 2.7305,
    3.3223, 3.9023, 4.5234, 5.1152, 5.5547,
)

_DEFAULT_THRESHOLD_DB = (-6.0, 28.0)


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class Numerology:
    """Slot/RB geometry. Defaults are 5G NR at 60 kHz subcarrier spacing."""

    scs_hz: float = 60e3
    n_sc: int = 12
    t_slot_s: float = 0.25e-3

    def __post_init__(self):
        if self.scs_hz <= 0 or self.n_sc < 1 or self.t_slot_s <= 0:
            raise ValueError("numerology fields must be positive")

    @property
    def rb_bandwidth_hz(self) -> float:
        return self.n_sc * self.scs_hz


@dataclass(frozen=True)
class McsTable:
    """Contiguous SNR partition with one spectral efficiency per interval.

    boundaries has len(etas) + 1 entries in linear SNR, starting at 0 and
    ending at +inf; level m covers [boundaries[m], boundaries[m+1]).
    """

    boundaries: tuple[float, ...]
    etas: tuple[float, ...]

    def __post_init__(self):
        if len(self.boundaries) != len(self.etas) + 1:
            raise ValueError("need len(etas)+1 boundaries")
        if not self.etas:
            raise ValueError("MCS table cannot be empty")
        if self.boundaries[0] != 0.0:
            raise ValueError("first SNR boundary must be 0")
        if not math.isinf(self.boundaries[-1]):
            raise ValueError("last SNR boundary must be +inf")
        for lo, hi in zip(self.boundaries, self.boundaries[1:]):
            if not lo < hi:
                raise ValueError("SNR boundaries must be strictly increasing")
        for a, b in zip(self.etas, self.etas[1:]):
            if not a < b:
                raise ValueError("spectral efficiencies must be strictly increasing")
        if self.etas[0] < 0:
            raise ValueError("spectral efficiencies must be non-negative")

    def __len__(self) -> int:
        return len(self.etas)


@dataclass(frozen=True)
class McsPmf:
    """Per-UE MCS selection probabilities, aligned with a McsTable."""

    probabilities: tuple[float, ...]

    def __post_init__(self):
        if any(not 0.0 <= p <= 1.0 for p in self.probabilities):
            raise ValueError("MCS probabilities must lie in [0, 1]")
        if abs(math.fsum(self.probabilities) - 1.0) > 1e-9:
            raise ValueError(
                f"MCS probabilities sum to {math.fsum(self.probabilities)!r}"
            )


@dataclass(frozen=True)
class PathLossParams:
    """Log-distance path loss: PL_dB(d) = ref_loss_db + 10*n*log10(d/d0).

    ref_loss_db = None means free-space loss at the reference distance for
    the carrier in use (resolved inside path_loss_linear).
    """

    exponent: float = 3.0
    ref_distance_m: float = 1.0
    ref_loss_db: float | None = None

    def __post_init__(self):
        if self.exponent < 0 or self.ref_distance_m <= 0:
            raise ValueError("path loss parameters out of range")


def free_space_loss_db(distance_m: float, carrier_hz: float) -> float:
    return 20.0 * math.log10(4.0 * math.pi * distance_m * carrier_hz / _SPEED_OF_LIGHT)


def path_loss_linear(
    distance_m: float, carrier_hz: float, model: PathLossParams
) -> float:
    """Linear power gain in (0, 1] at the given distance."""
    if distance_m <= 0:
        raise ValueError("distance must be > 0")
    ref_db = model.ref_loss_db
    if ref_db is None:
        ref_db = free_space_loss_db(model.ref_distance_m, carrier_hz)
    loss_db = ref_db + 10.0 * model.exponent * math.log10(
        distance_m / model.ref_distance_m
    )
    return min(db_to_linear(-loss_db), 1.0)


@dataclass(frozen=True)
class LinkProfile:
    """Downlink budget for one UE; avg_snr_linear is derived and cached."""

    ue_id: str
    distance_m: float
    tx_power_dbm: float
    noise_density_dbm_hz: float
    path_loss_gain: float
    avg_snr_linear: float

    def __post_init__(self):
        if self.distance_m <= 0:
            raise ValueError(f"ue {self.ue_id}: distance must be > 0")
        if not 0.0 < self.path_loss_gain <= 1.0:
            raise ValueError(f"ue {self.ue_id}: path loss gain must be in (0, 1]")
        if self.avg_snr_linear <= 0:
            raise ValueError(f"ue {self.ue_id}: average SNR must be > 0")

    @classmethod
    def from_geometry(
        cls,
        ue_id: str,
        distance_m: float,
        tx_power_dbm: float,
        noise_density_dbm_hz: float,
        carrier_hz: float,
        path_loss: PathLossParams,
        numerology: Numerology,
    ) -> "LinkProfile":
        gain = path_loss_linear(distance_m, carrier_hz, path_loss)
        snr = _avg_snr(tx_power_dbm, gain, noise_density_dbm_hz, numerology)
        return cls(ue_id, distance_m, tx_power_dbm, noise_density_dbm_hz, gain, snr)


def _avg_snr(
    tx_power_dbm: float,
    path_loss_gain: float,
    noise_density_dbm_hz: float,
    numerology: Numerology,
) -> float:
    noise_dbm = noise_density_dbm_hz + 10.0 * math.log10(numerology.rb_bandwidth_hz)
    return path_loss_gain * db_to_linear(tx_power_dbm - noise_dbm)


def avg_snr(link: LinkProfile, numerology: Numerology) -> float:
    """Average linear SNR over one RB bandwidth: tx * gain / noise power."""
    return _avg_snr(
        link.tx_power_dbm, link.path_loss_gain, link.noise_density_dbm_hz, numerology
    )


def mcs_pmf(gamma_bar: float, table: McsTable) -> McsPmf:
    """MCS selection probabilities under exponential (Rayleigh) SNR.

    p_m = exp(-snr_min/gamma_bar) - exp(-snr_max/gamma_bar); the terms
    telescope so the PMF sums to 1 up to rounding.
    """
    if gamma_bar <= 0:
        raise ValueError("average SNR must be > 0")
    ccdf = [math.exp(-b / gamma_bar) if not math.isinf(b) else 0.0
            for b in table.boundaries]
    probs = tuple(hi - lo for hi, lo in zip(ccdf, ccdf[1:]))
    return McsPmf(probs)


def per_rb_bits(numerology: Numerology, eta: float) -> float:
    """Bits served by one RB in one slot at spectral efficiency eta."""
    if eta < 0:
        raise ValueError("eta must be >= 0")
    return numerology.n_sc * numerology.scs_hz * numerology.t_slot_s * eta


def _neg_log_mgf_scalar(theta: float, probs, bits) -> float:
    """-ln(sum_m p_m exp(-theta*b_m)), accurate across the whole theta range.

    Near theta = 0 the sum is close to 1, so it is formed with expm1 and
    log1p to dodge cancellation; once it drops below 1/2 the log is taken
    on an exponent-shifted direct sum (log-sum-exp), which stays exact even
    when every raw term underflows.
    """
    s = math.fsum(p * math.expm1(-theta * b) for p, b in zip(probs, bits))
    if s > -0.5:
        return -math.log1p(s)
    ref = min(b for p, b in zip(probs, bits) if p > 0.0)
    shifted = math.fsum(
        p * math.exp(-theta * (b - ref)) for p, b in zip(probs, bits) if p > 0.0
    )
    return theta * ref - math.log(shifted)


def _neg_log_mgf_vec(thetas: np.ndarray, probs: np.ndarray, bits: np.ndarray):
    """Vectorised _neg_log_mgf_scalar over a theta array."""
    s = np.expm1(-np.outer(thetas, bits)) @ probs
    near_one = s > -0.5
    ref = bits[probs > 0.0].min()
    shifted = np.exp(-np.outer(thetas, bits - ref)) @ probs
    return np.where(near_one, -np.log1p(s), thetas * ref - np.log(shifted))


def service_rho(
    theta: float,
    pmf: McsPmf,
    table: McsTable,
    n_rb: float,
    numerology: Numerology,
) -> float:
    """Service-envelope rate in bits/s for n_rb resource blocks.

    rho_s(theta) = -n_rb * ln(sum_m p_m exp(-theta*b_m)) / (theta*t_slot)
    with b_m the per-RB bits of level m. n_rb may be fractional (round-robin
    split of an integer slice budget). The theta -> 0 limit is the mean
    service rate; for a single-level table the rate is theta-independent.
    """
    if theta <= 0:
        raise ValueError("theta must be > 0")
    if n_rb <= 0:
        raise ValueError("n_rb must be > 0")
    bits = [per_rb_bits(numerology, eta) for eta in table.etas]
    val = _neg_log_mgf_scalar(theta, pmf.probabilities, bits)
    return n_rb * val / (theta * numerology.t_slot_s)


def service_rho_vec(
    thetas: np.ndarray,
    pmf: McsPmf,
    table: McsTable,
    n_rb: float,
    numerology: Numerology,
) -> np.ndarray:
    """Vectorised service_rho over an array of theta values."""
    bits = np.array([per_rb_bits(numerology, eta) for eta in table.etas])
    probs = np.array(pmf.probabilities)
    val = _neg_log_mgf_vec(thetas, probs, bits)
    return n_rb * val / (thetas * numerology.t_slot_s)


def mean_service_rate(
    pmf: McsPmf, table: McsTable, n_rb: float, numerology: Numerology
) -> float:
    """Average service rate in bits/s (the theta -> 0 envelope limit)."""
    mean_bits = math.fsum(
        p * per_rb_bits(numerology, eta)
        for p, eta in zip(pmf.probabilities, table.etas)
    )
    return n_rb * mean_bits / numerology.t_slot_s


def default_mcs_table() -> McsTable:
    """15-level table: CQI efficiencies, thresholds even in dB over [-6, 28]."""
    lo, hi = _DEFAULT_THRESHOLD_DB
    interior = np.linspace(lo, hi, len(_CQI_EFFICIENCIES) - 1)
    boundaries = (0.0, *(db_to_linear(x) for x in interior), math.inf)
    return McsTable(boundaries, _CQI_EFFICIENCIES)


def mcs_table_from_db_records(
    records: list[tuple[float, float, float]], origin: str = "mcs table"
) -> McsTable:
    """Build a table from (snr_min_db, snr_max_db, eta) rows.

    Rows must be sorted and contiguous; -inf/inf are accepted at the ends.
    """
    if not records:
        raise ScenarioValidationError(f"{origin}: no MCS records")
    for i, (lo, hi, _) in enumerate(records[:-1]):
        nxt = records[i + 1][0]
        if hi != nxt:
            raise ScenarioValidationError(
                f"{origin}: record {i} ends at {hi} dB but record {i + 1} "
                f"starts at {nxt} dB (must be contiguous)"
            )
        if not lo < hi:
            raise ScenarioValidationError(f"{origin}: record {i} has min >= max")
    first_min, last_max = records[0][0], records[-1][1]
    if not math.isinf(first_min) or first_min > 0:
        # A finite first threshold leaves [0, thr) uncovered in linear SNR;
        # the lowest level must start at linear 0, i.e. -inf dB.
        raise ScenarioValidationError(
            f"{origin}: first snr_min_db must be -inf, got {first_min}"
        )
    if not (math.isinf(last_max) and last_max > 0):
        raise ScenarioValidationError(
            f"{origin}: last snr_max_db must be inf, got {last_max}"
        )
    boundaries = [0.0]
    boundaries += [db_to_linear(lo) for lo, _, _ in records[1:]]
    boundaries.append(math.inf)
    etas = tuple(eta for _, _, eta in records)
    try:
        return McsTable(tuple(boundaries), etas)
    except ValueError as exc:
        raise ScenarioValidationError(f"{origin}: {exc}") from exc


def load_mcs_table(path: str | Path) -> McsTable:
    """Parse a text MCS table: one 'snr_min_db snr_max_db eta' row per level."""
    path = Path(path)
    records = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ScenarioParseError(
                f"{path}:{lineno}: expected 'snr_min_db snr_max_db eta', got {raw!r}"
            )
        try:
            records.append((float(parts[0]), float(parts[1]), float(parts[2])))
        except ValueError as exc:
            raise ScenarioParseError(f"{path}:{lineno}: {exc}") from exc
    return mcs_table_from_db_records(records, origin=str(path))
