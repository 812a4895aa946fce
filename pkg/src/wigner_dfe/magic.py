"""Magic measures: mana and Wigner rank for states and unitary channels.

All logarithms are base 2, so 2^mana is the Wigner l1 mass Delta_psi (states)
or the maximal column l1 mass Delta_U (channels) used by the protocols.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError
from .phase_space import ChannelWigner, WignerFunction
from .system import DEFAULT_TOL, Tolerances

DEFAULT_ZERO_THRESHOLD = 1e-10


@dataclass(frozen=True)
class MagicReport:
    """Mana and Wigner-rank summary of a state or unitary channel."""

    mana: float
    wigner_rank: int
    log_wigner_rank: float
    support: np.ndarray = field(repr=False)
    zero_threshold: float
    rank_sensitivity: tuple[int, int]
    stable: bool

    @property
    def support_size(self) -> int:
        return int(self.wigner_rank)

    def to_json_dict(self) -> dict:
        return {
            "mana": self.mana,
            "wigner_rank": self.wigner_rank,
            "log_wigner_rank": self.log_wigner_rank,
            "support_size": self.support_size,
            "threshold": self.zero_threshold,
        }


def _clip_log(value: float, tol: Tolerances) -> float:
    if value < -tol.derived:
        raise NumericalError(f"magic measure computed as {value}, below -tolerance")
    return 0.0 if abs(value) <= tol.derived else value


def mana_state(w: WignerFunction, tol: Tolerances = DEFAULT_TOL) -> float:
    """M(rho) = log2 sum_u |W_rho(u)|; zero exactly on Wigner-positive states."""
    total = w.sum()
    if abs(total - 1.0) > tol.derived:
        raise ValidationError(
            f"Wigner function sums to {total}, not 1: not a density-matrix source"
        )
    return _clip_log(math.log2(float(np.abs(w.values).sum())), tol)


def mana_channel(cw: ChannelWigner, tol: Tolerances = DEFAULT_TOL) -> float:
    """M(N) = log2 max_u sum_v |W_N(v|u)|; zero exactly on CPWP channels."""
    colsum_err = np.abs(cw.column_sums() - 1.0).max()
    if colsum_err > tol.derived:
        raise ValidationError(
            f"channel Wigner columns deviate from sum 1 by {colsum_err:.3e}"
        )
    return _clip_log(math.log2(float(np.abs(cw.values).sum(axis=0).max())), tol)


def _rank_at(values: np.ndarray, threshold: float) -> int:
    return int((np.abs(values) > threshold).sum())


def wigner_rank_state(
    w: WignerFunction,
    zero_threshold: float = DEFAULT_ZERO_THRESHOLD,
    tol: Tolerances = DEFAULT_TOL,
) -> MagicReport:
    """Wigner rank chi, logarithmic rank chi_log = log2 chi - log2 D, and the
    threshold-sensitivity band, for a pure-state Wigner function."""
    if zero_threshold <= 0:
        raise ValidationError("zero_threshold must be positive")
    purity = w.purity()
    if purity < 1.0 - 1e-6:
        raise ValidationError(
            f"Wigner rank is defined for pure states; purity = {purity:.8f}"
        )
    chi = _rank_at(w.values, zero_threshold)
    lo = _rank_at(w.values, zero_threshold * 10.0)
    hi = _rank_at(w.values, zero_threshold * 0.1)
    support = np.nonzero(np.abs(w.values) > zero_threshold)[0]
    chi_log = math.log2(chi) - math.log2(w.system.D)
    return MagicReport(
        mana=mana_state(w, tol),
        wigner_rank=chi,
        log_wigner_rank=chi_log,
        support=support,
        zero_threshold=zero_threshold,
        rank_sensitivity=(lo, hi),
        stable=(lo == chi == hi),
    )


def wigner_rank_channel(
    cw: ChannelWigner,
    zero_threshold: float = DEFAULT_ZERO_THRESHOLD,
    tol: Tolerances = DEFAULT_TOL,
) -> MagicReport:
    """Wigner rank of a unitary channel: the number of nonzero (v, u) entries,
    normalized by the d^(2n) underlying dimension."""
    if zero_threshold <= 0:
        raise ValidationError("zero_threshold must be positive")
    if not cw.unitary:
        raise ValidationError("channel Wigner rank is defined for unitary channels")
    chi = _rank_at(cw.values, zero_threshold)
    lo = _rank_at(cw.values, zero_threshold * 10.0)
    hi = _rank_at(cw.values, zero_threshold * 0.1)
    support = np.argwhere(np.abs(cw.values) > zero_threshold)
    chi_log = math.log2(chi) - math.log2(cw.system.P)
    if chi_log < -tol.derived:
        raise NumericalError(
            f"unitary channel has chi_log = {chi_log}, below the d^(2n) floor"
        )
    return MagicReport(
        mana=mana_channel(cw, tol),
        wigner_rank=chi,
        log_wigner_rank=max(chi_log, 0.0) if abs(chi_log) <= tol.derived else chi_log,
        support=support,
        zero_threshold=zero_threshold,
        rank_sensitivity=(lo, hi),
        stable=(lo == chi == hi),
    )
