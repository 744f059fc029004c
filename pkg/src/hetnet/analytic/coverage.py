"""Network-level coverage: the two tiers' joint probabilities assembled.

The total coverage event is a disjoint union over the association outcome:
either the user is pico-associated and both its links are up, or it is
macro-associated and its single link is up.  Both tier routines already
return joint probabilities (association event included), so the total is a
plain sum -- no extra association weighting.

The two conditional fields decompose the pico-side event one link at a
time: access_conditional = Pr(access link up | pico association) and
backhaul_conditional = Pr(backhaul link up | pico association), obtained by
sending the other link's threshold to zero (its constraint becomes vacuous
while every interference term it does not own stays in place).
"""
from __future__ import annotations

from dataclasses import dataclass

from ..core import DuplexMode, NetworkParams, Thresholds
from .association import association_probability
from .macro import coverage_macro
from .smallcell import coverage_smallcell

__all__ = ["CoverageBreakdown", "coverage_total"]

# stand-in for a threshold sent to zero; far below any sharpness scale the
# solver can resolve, far above underflow
_VANISHING = 1e-12


@dataclass(frozen=True)
class CoverageBreakdown:
    """Coverage split by tier, plus association shares and per-link terms.

    p_smallcell_joint / p_macro_joint are joint with the association event;
    p_total is their sum.  The *_conditional fields are conditioned on pico
    association (0.0 when that event has zero probability).
    """

    p_total: float
    p_smallcell_joint: float
    p_macro_joint: float
    p_assoc_s: float
    p_assoc_m: float
    backhaul_conditional: float
    access_conditional: float


def coverage_total(params: NetworkParams, th: Thresholds,
                   mode: DuplexMode = DuplexMode.IBFD,
                   bearing: str = "circle") -> CoverageBreakdown:
    """Assemble tier coverages at given thresholds into one breakdown."""
    p_s, p_m = association_probability(params)
    p_small = coverage_smallcell(params, th.T_s, th.T_b, mode,
                                 bearing=bearing)
    p_macro = coverage_macro(params, th.T_m, mode)
    if p_s > 0.0:
        access = coverage_smallcell(params, th.T_s, _VANISHING, mode,
                                    bearing=bearing) / p_s
        backhaul = coverage_smallcell(params, _VANISHING, th.T_b, mode,
                                      bearing=bearing) / p_s
    else:
        access = backhaul = 0.0
    clip = lambda x: min(max(x, 0.0), 1.0)  # noqa: E731
    return CoverageBreakdown(
        p_total=clip(p_small + p_macro),
        p_smallcell_joint=p_small,
        p_macro_joint=p_macro,
        p_assoc_s=p_s,
        p_assoc_m=p_m,
        backhaul_conditional=clip(backhaul),
        access_conditional=clip(access),
    )
