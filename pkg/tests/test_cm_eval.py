"""Unit tests for high-precision CM evaluation and rounding certificates."""

import mpmath
import pytest

from moduli_traces.arith import PrimeLevel
from moduli_traces.cm_eval import (
    ENV_PREC_BITS,
    PrecisionContext,
    PrecisionFailure,
    cm_point_q,
    env_bits_floor,
    eval_at_cm,
    plan_precision,
    round_to_integer,
)
from moduli_traces.hauptmodul import build_hauptmodul
from moduli_traces.qforms import QuadForm, enumerate_classes
from moduli_traces.qseries import TruncatedLaurentSeries, WindowError

P2 = PrimeLevel(2)


class TestContext:
    def test_validation(self):
        with pytest.raises(ValueError):
            PrecisionContext(bits=32)
        with pytest.raises(ValueError):
            PrecisionContext(tol=0.7)
        with pytest.raises(ValueError):
            PrecisionContext(tol=0.0)

    def test_escalate_doubles(self):
        ctx = PrecisionContext(bits=128, terms=64)
        up = ctx.escalate()
        assert up.bits == 256 and up.terms == 128 and up.tol == ctx.tol


class TestEvalAtCM:
    def test_single_term_at_i(self):
        # series q^-1 at alpha = i is e^{2 pi}
        series = TruncatedLaurentSeries(-1, [1] + [0] * 40)
        ctx = PrecisionContext(bits=128, terms=30)
        val = eval_at_cm(series, QuadForm(1, 0, 1), ctx)
        with mpmath.workprec(128):
            expect = mpmath.exp(2 * mpmath.pi)
            assert abs(val - expect) < mpmath.mpf(2) ** -100
        assert str(val.real)[:8] == "535.4916"

    def test_cm_point_on_negative_real_axis(self):
        # F = [2,2,1]: alpha = (-1+i)/2, so q = -e^{-pi}
        q = cm_point_q(QuadForm(2, 2, 1), 128)
        with mpmath.workprec(128):
            assert abs(q + mpmath.exp(-mpmath.pi)) < mpmath.mpf(2) ** -100

    def test_hauptmodul_singular_value(self):
        # j_2* at alpha = (-1+i)/2 is the algebraic integer -104 (the d=4
        # class is symmetric, so a single evaluation is already real)
        h = build_hauptmodul(P2, 120)
        ctx = PrecisionContext(bits=192, terms=100)
        val = eval_at_cm(h.series, QuadForm(2, 2, 1), ctx)
        with mpmath.workprec(192):
            assert abs(val.imag) < mpmath.mpf(2) ** -96
            assert abs(val.real + 104) < 1e-30

    def test_window_contract(self):
        series = TruncatedLaurentSeries(-1, [1] * 10)
        with pytest.raises(WindowError):
            eval_at_cm(series, QuadForm(1, 0, 1), PrecisionContext(bits=128, terms=50))

    def test_deterministic(self):
        h = build_hauptmodul(P2, 80)
        ctx = PrecisionContext(bits=192, terms=60)
        a = eval_at_cm(h.series, QuadForm(2, 2, 1), ctx)
        b = eval_at_cm(h.series, QuadForm(2, 2, 1), ctx)
        assert a == b

    def test_conjugate_beta_pairs(self):
        # d=15 at p=2 has betas {1, 3}; the beta-group sums are conjugates
        classes = enumerate_classes(P2, 15)
        assert {c.beta for c in classes} == {1, 3}
        h = build_hauptmodul(P2, 130)
        ctx = PrecisionContext(bits=192, terms=100)
        with mpmath.workprec(192):
            sums = {1: mpmath.mpc(0), 3: mpmath.mpc(0)}
            for c in classes:
                sums[c.beta] += eval_at_cm(h.series, c.eval_form, ctx) / c.omega
            assert abs(sums[1] - mpmath.conj(sums[3])) < mpmath.mpf(2) ** -96
            assert abs((sums[1] + sums[3]).imag) < mpmath.mpf(2) ** -96

    def test_precision_doubling_stability(self):
        h = build_hauptmodul(P2, 300)
        for d in (4, 15, 23):
            for cl in enumerate_classes(P2, d):
                ctx = plan_precision(d, [cl])
                v1 = eval_at_cm(h.series, cl.eval_form, ctx)
                v2 = eval_at_cm(h.series, cl.eval_form, ctx.escalate())
                with mpmath.workprec(2 * ctx.bits):
                    assert abs(v1 - v2) < mpmath.mpf(2) ** (-ctx.bits // 2)


class TestPlanPrecision:
    def test_d4_example(self):
        classes = enumerate_classes(P2, 4)
        ctx = plan_precision(4, classes)
        assert ctx.bits == 128

    def test_monotone_in_d(self):
        prev = 0
        for d in (4, 100, 400, 1600):
            ctx = plan_precision(d, enumerate_classes(P2, d))
            assert ctx.bits >= prev
            prev = ctx.bits

    def test_terms_grow_as_height_shrinks(self):
        # a min-height class list forces more series terms than a tall one
        tall = plan_precision(400, [enumerate_classes(P2, 400)[0]])
        classes = enumerate_classes(P2, 400)
        low = plan_precision(400, classes)
        assert low.terms >= tall.terms

    def test_respects_ctx0_floor(self):
        classes = enumerate_classes(P2, 4)
        ctx = plan_precision(4, classes, ctx0=PrecisionContext(bits=512, terms=300))
        assert ctx.bits >= 512 and ctx.terms >= 300

    def test_env_floor(self, monkeypatch):
        monkeypatch.setenv(ENV_PREC_BITS, "777")
        assert env_bits_floor() == 777
        classes = enumerate_classes(P2, 4)
        assert plan_precision(4, classes).bits >= 777
        monkeypatch.setenv(ENV_PREC_BITS, "junk")
        assert env_bits_floor() == 0

    def test_empty_classes_rejected(self):
        with pytest.raises(ValueError):
            plan_precision(4, [])


class TestRoundToInteger:
    def test_near_integer(self):
        ctx = PrecisionContext(bits=128, tol=1e-6)
        with mpmath.workprec(128):
            rv = round_to_integer(mpmath.mpf("42.0000000001"), ctx)
        assert rv.value == 42 and rv.residual < 1e-9

    def test_half_integer_fails(self):
        ctx = PrecisionContext(bits=128, tol=1e-6)
        with pytest.raises(PrecisionFailure):
            round_to_integer(mpmath.mpf("41.5"), ctx)

    def test_escalation_path(self):
        # the recompute thunk converges to an integer once bits double
        ctx = PrecisionContext(bits=128, terms=8, tol=1e-6)
        calls = []

        def recompute(c):
            calls.append((c.bits, c.terms))
            return mpmath.mpf(7) + mpmath.mpf(2) ** (-c.terms)

        rv = round_to_integer(mpmath.mpf("7.01"), ctx, recompute=recompute)
        assert rv.value == 7
        assert calls and calls[0] == (256, 16)

    def test_retry_budget_exhausted(self):
        ctx = PrecisionContext(bits=128, tol=1e-6, max_retries=2)
        calls = []

        def stuck(c):
            calls.append(c.bits)
            return mpmath.mpf("0.5")

        with pytest.raises(PrecisionFailure):
            round_to_integer(mpmath.mpf("0.5"), ctx, recompute=stuck)
        assert len(calls) == 2
