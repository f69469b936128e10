"""High-precision evaluation of q-expansions at CM points.

Correctness rests on an a-posteriori certificate: each sum must round to an
integer within a tolerance, and escalation (doubling mantissa bits and series
terms) must leave the rounded integer unchanged.  Tail planning uses the
heuristic coefficient envelope |c_n| <= e^{4 pi sqrt(n/p)}; the certificate,
not the envelope, is the correctness gate.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace
from typing import Callable

import mpmath

from .qforms import QuadForm, HeegnerClass
from .qseries import TruncatedLaurentSeries, WindowError

ENV_PREC_BITS = "MODULI_TRACES_PREC_BITS"

_GUARD_BITS = 96
_MIN_BITS = 128


class PrecisionFailure(ArithmeticError):
    """A sum refused to round to an integer after all escalations."""


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision plan for one evaluation batch."""

    bits: int = _MIN_BITS
    terms: int = 64
    tol: float = 1e-6
    max_retries: int = 4

    def __post_init__(self):
        if self.bits < 64:
            raise ValueError("need at least 64 mantissa bits")
        if not (0 < self.tol < 0.5):
            raise ValueError("tolerance must lie in (0, 0.5)")

    def escalate(self) -> "PrecisionContext":
        return replace(self, bits=2 * self.bits, terms=2 * self.terms)


@dataclass(frozen=True)
class RoundedValue:
    """An integer certified by its rounding residual."""

    value: int
    residual: float
    bits_used: int
    terms_used: int


def env_bits_floor() -> int:
    raw = os.environ.get(ENV_PREC_BITS, "")
    try:
        return max(int(raw), 0)
    except ValueError:
        return 0


def cm_point_q(F: QuadForm, bits: int) -> mpmath.mpc:
    """q = exp(2 pi i alpha_F) at the CM point alpha_F = (-b + i sqrt(d)) / (2a)."""
    with mpmath.workprec(bits):
        d = -F.disc
        alpha = (mpmath.mpc(-F.b, 0) + mpmath.sqrt(mpmath.mpf(d)) * 1j) / (2 * F.a)
        return mpmath.exp(2j * mpmath.pi * alpha)


def eval_at_cm(
    series: TruncatedLaurentSeries, F: QuadForm, ctx: PrecisionContext
) -> mpmath.mpc:
    """Sum the series at the CM point of F, using terms up to q^{ctx.terms}.

    The result is complex; callers sum conjugate class pairs before using the
    real part (a single class value is real only for symmetric classes).
    """
    if series.order <= ctx.terms:
        raise WindowError(
            f"series window order {series.order} below requested terms {ctx.terms}"
        )
    with mpmath.workprec(ctx.bits):
        q = cm_point_q(F, ctx.bits)
        return horner_in_q(series, q, ctx.terms, ctx.bits)


def horner_in_q(
    series: TruncatedLaurentSeries, q: mpmath.mpc, terms: int, bits: int
) -> mpmath.mpc:
    with mpmath.workprec(bits):
        s = mpmath.mpc(0)
        for n in range(terms, series.v - 1, -1):
            s = s * q + series.coeff(n)
        return s * q ** series.v


def horner_poly(poly: list[int], x: mpmath.mpc, bits: int) -> mpmath.mpc:
    with mpmath.workprec(bits):
        s = mpmath.mpc(0)
        for c in reversed(poly):
            s = s * x + c
        return s


def plan_precision(
    d: int,
    classes: list[HeegnerClass],
    ctx0: PrecisionContext | None = None,
    degree: int = 1,
) -> PrecisionContext:
    """Pick (bits, terms) for summing a degree-`degree` Faber series over classes.

    bits covers the largest term magnitude e^{2 pi degree sqrt(d)/(2 a_min)}
    plus guard bits; terms n is chosen so the envelope tail
    e^{-2 pi y_min n} e^{4 pi sqrt(n/p)} drops below 2^{-bits}.
    """
    if not classes:
        raise ValueError("plan_precision needs a nonempty class list")
    ctx0 = ctx0 or PrecisionContext()
    p = classes[0].p.p
    sqrt_d = math.sqrt(d)
    ys = [sqrt_d / (2 * h.eval_form.a) for h in classes]
    y_max, y_min = max(ys), min(ys)
    bits = math.ceil(2 * math.pi * degree * y_max / math.log(2)) + _GUARD_BITS
    bits = max(bits, ctx0.bits, _MIN_BITS, env_bits_floor())
    target = bits * math.log(2)
    n = 64
    for _ in range(8):
        n = math.ceil((target + 4 * math.pi * math.sqrt(n / p)) / (2 * math.pi * y_min))
    n = max(n + 8, ctx0.terms)
    return replace(ctx0, bits=bits, terms=n)


def round_to_integer(
    x,
    ctx: PrecisionContext,
    recompute: Callable[[PrecisionContext], "mpmath.mpf"] | None = None,
) -> RoundedValue:
    """Nearest integer with residual certificate; escalates precision on failure.

    `recompute`, when given, is called with the escalated context and must
    return a fresh value of the same quantity.  Exhausting max_retries raises
    PrecisionFailure: that signals a bug or an inadequate model, never a value
    to be silently rounded.
    """
    attempts = 0
    while True:
        with mpmath.workprec(ctx.bits):
            n = int(mpmath.nint(x))
            residual = float(abs(x - n))
        if residual <= ctx.tol:
            return RoundedValue(n, residual, ctx.bits, ctx.terms)
        if recompute is None or attempts >= ctx.max_retries:
            raise PrecisionFailure(
                f"residual {residual} above tolerance {ctx.tol} after "
                f"{attempts} escalations (bits={ctx.bits}, terms={ctx.terms})"
            )
        ctx = ctx.escalate()
        x = recompute(ctx)
        attempts += 1
