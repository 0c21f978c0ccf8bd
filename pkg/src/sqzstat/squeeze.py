"""Squeezing-function families evaluated in log domain.

A family is the triple (h, H, f): a positive deformation h applied to
class counts, its inverse H, and the slope f = dh/dx.  The identity
family leaves counts untouched; the power-law ("tsallis") family is
parametrized by an entropic index q and built from the deformed
logarithm ln_q x = (x^(1-q) - 1)/(1-q) and its inverse.

Everything works on ln(count) so that macroscopically large counts are
never materialized.  Inverse evaluations falling outside the deformed
exponential domain produce an *excluded* value (zero-size class) with a
cutoff flag instead of raising.

The scalar squeeze/unsqueeze pair uses compensated (hi + lo) arithmetic
for the deformed log: near the domain boundary the argument 1 + (1-q)x
suffers catastrophic cancellation in bare doubles, and the compensation
keeps forward/inverse roundtrips accurate to a few ulp for all q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import SqueezeDomainError

__all__ = [
    "LogValue",
    "SqueezeFamily",
    "SqueezeSlope",
    "EXCLUDED",
    "squeeze_log",
    "unsqueeze_log",
    "squeeze_slope",
]

_IDENTITY = "identity"
_TSALLIS = "tsallis"
_CUSTOM = "custom"

_SPLIT = 134217729.0  # 2**27 + 1, Dekker splitting constant


def _two_prod(a: float, b: float) -> tuple[float, float]:
    p = a * b
    ah = (a * _SPLIT) - (a * _SPLIT - a)
    al = a - ah
    bh = (b * _SPLIT) - (b * _SPLIT - b)
    bl = b - bh
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def _two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    v = s - a
    err = (a - (s - v)) + (b - v)
    return s, err


@dataclass(frozen=True)
class LogValue:
    """ln of a positive count, or the excluded (zero-size) state.

    ``cutoff_flag`` marks values clamped to zero by the deformed
    exponential cutoff; excluded values carry ``ln_x = -inf`` so that
    downstream log-sum-exp reductions skip them naturally.  ``ln_x_lo``
    is an optional compensation term (``ln_x + ln_x_lo`` is a more
    accurate value of the same quantity).
    """

    ln_x: float
    cutoff_flag: bool = False
    ln_x_lo: float = 0.0

    @property
    def excluded(self) -> bool:
        return self.cutoff_flag

    def value(self) -> float:
        """Linear-domain value; 0.0 for the excluded state."""
        return 0.0 if self.cutoff_flag else math.exp(self.ln_x)


EXCLUDED = LogValue(ln_x=-math.inf, cutoff_flag=True)


class SqueezeSlope(NamedTuple):
    """Slope data at one point.

    df_dg: the derivative dh/dx itself (inf when not representable).
    ln_ratio: ln of the logarithmic slope f/h = d(ln h)/dx, always finite.
    """

    df_dg: float
    ln_ratio: float


def _as_pair(x: "LogValue | float") -> tuple[float, float]:
    if isinstance(x, LogValue):
        if x.cutoff_flag:
            raise SqueezeDomainError("excluded value passed where a live count is required")
        hi, lo = x.ln_x, x.ln_x_lo
    else:
        hi, lo = float(x), 0.0
    if not math.isfinite(hi):
        raise SqueezeDomainError(f"non-finite log input: {hi!r}")
    return hi, lo


@dataclass(frozen=True)
class SqueezeFamily:
    """Immutable deformation family; safe to share across workers.

    Build with ``identity()``, ``tsallis(q)`` or ``custom(...)``.  q = 1
    is a dedicated identity branch, never a numerical limit.  Custom
    families must supply all three hooks (ln h, ln H, dh/dx, each taking
    or producing logs of counts); the constructor probes them on a grid
    and rejects triples that fail the inverse roundtrip or whose slope
    disagrees with a finite difference of h.
    """

    kind: str
    q: float = 1.0
    ln_h_hook: Callable[[float], float] | None = None
    ln_H_hook: Callable[[float], float] | None = None
    slope_hook: Callable[[float], float] | None = None

    @staticmethod
    def identity() -> "SqueezeFamily":
        return SqueezeFamily(kind=_IDENTITY, q=1.0)

    @staticmethod
    def tsallis(q: float) -> "SqueezeFamily":
        if not math.isfinite(q):
            raise SqueezeDomainError(f"entropic index must be finite, got {q!r}")
        return SqueezeFamily(kind=_TSALLIS, q=float(q))

    @staticmethod
    def custom(
        ln_h: Callable[[float], float],
        ln_H: Callable[[float], float],
        slope: Callable[[float], float],
        probe_ln_g: "np.ndarray | None" = None,
    ) -> "SqueezeFamily":
        fam = SqueezeFamily(kind=_CUSTOM, q=math.nan, ln_h_hook=ln_h, ln_H_hook=ln_H, slope_hook=slope)
        fam._probe(probe_ln_g)
        return fam

    @property
    def is_identity(self) -> bool:
        return self.kind == _IDENTITY or (self.kind == _TSALLIS and self.q == 1.0)

    # -- compensated scalar pair forms (tsallis conditioning fix) -------

    def _squeeze_pair(self, x_hi: float, x_lo: float) -> tuple[float, float]:
        if self.is_identity:
            return x_hi, x_lo
        if self.kind == _CUSTOM:
            return self.ln_h_hook(x_hi + x_lo), 0.0
        u = 1.0 - self.q
        t_hi, t_lo = _two_prod(u, x_hi)
        t_lo += u * x_lo
        if t_hi <= -0.5:
            # cancellation regime: keep e^(u x) - 1 as an exact pair
            e = math.exp(t_hi) * (1.0 + t_lo)
            m_hi, m_lo = _two_sum(-1.0, e)
        else:
            m_hi = math.expm1(t_hi)
            m_lo = math.exp(t_hi) * t_lo if math.isfinite(m_hi) else 0.0
        if not math.isfinite(m_hi):
            raise SqueezeDomainError(
                f"ln h overflow: deformed log of exp({x_hi:g}) exceeds float range at q={self.q:g}"
            )
        q1 = m_hi / u
        p_hi, p_lo = _two_prod(q1, u)
        q2 = (((m_hi - p_hi) - p_lo) + m_lo) / u
        return _two_sum(q1, q2)

    def _unsqueeze_pair(self, y_hi: float, y_lo: float) -> float:
        if self.is_identity:
            return y_hi + y_lo
        if self.kind == _CUSTOM:
            return self.ln_H_hook(y_hi + y_lo)
        u = 1.0 - self.q
        p_hi, p_lo = _two_prod(u, y_hi)
        s_hi, s_lo = _two_sum(1.0, p_hi)
        bracket = s_hi + (s_lo + (p_lo + u * y_lo))
        if bracket <= 0.0:
            return -math.inf
        return math.log(bracket) / u

    # -- plain scalar forms ---------------------------------------------

    def ln_squeeze(self, ln_g: float) -> float:
        """ln h(g) from ln g."""
        if self.is_identity:
            return ln_g
        if self.kind == _TSALLIS:
            u = 1.0 - self.q
            return math.expm1(u * ln_g) / u
        return self.ln_h_hook(ln_g)

    def ln_unsqueeze(self, ln_x: float) -> float:
        """ln H(x) from ln x; -inf signals the excluded state."""
        if self.is_identity:
            return ln_x
        if self.kind == _TSALLIS:
            u = 1.0 - self.q
            arg = 1.0 + u * ln_x
            if arg <= 0.0:
                return -math.inf
            return math.log1p(u * ln_x) / u
        return self.ln_H_hook(ln_x)

    def ln_log_slope(self, ln_g: float) -> float:
        """ln of d(ln h)/dx at g = exp(ln_g), i.e. ln(f(g)/h(g))."""
        if self.is_identity:
            return -ln_g
        if self.kind == _TSALLIS:
            return -self.q * ln_g
        f = self.slope_hook(ln_g)
        if f < 0:
            raise SqueezeDomainError("slope hook returned a negative derivative")
        return math.log(f) - self.ln_h_hook(ln_g)

    def slope(self, ln_g: float) -> float:
        """f(g) = dh/dx at g = exp(ln_g); inf when not representable."""
        if self.is_identity:
            return 1.0
        if self.kind == _TSALLIS:
            ln_f = self.ln_squeeze(ln_g) - self.q * ln_g
            try:
                return math.exp(ln_f)
            except OverflowError:
                return math.inf
        return self.slope_hook(ln_g)

    # -- vectorized forms used by the ensemble engine -------------------

    def ln_squeeze_arr(self, ln_g: np.ndarray) -> np.ndarray:
        ln_g = np.asarray(ln_g, dtype=float)
        if self.is_identity:
            return ln_g.copy()
        if self.kind == _TSALLIS:
            u = 1.0 - self.q
            with np.errstate(over="ignore"):  # caller checks for inf
                return np.expm1(u * ln_g) / u
        return np.array([self.ln_h_hook(v) for v in ln_g])

    def ln_unsqueeze_arr(self, ln_x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vector inverse; returns (ln H values, excluded mask)."""
        ln_x = np.asarray(ln_x, dtype=float)
        if self.is_identity:
            return ln_x.copy(), np.zeros(ln_x.shape, dtype=bool)
        if self.kind == _TSALLIS:
            u = 1.0 - self.q
            arg = 1.0 + u * ln_x
            excluded = arg <= 0.0
            out = np.full(ln_x.shape, -np.inf)
            ok = ~excluded
            out[ok] = np.log1p(u * ln_x[ok]) / u
            return out, excluded
        out = np.empty(ln_x.shape)
        excluded = np.zeros(ln_x.shape, dtype=bool)
        for i, v in enumerate(ln_x):
            w = self.ln_H_hook(v)
            out[i] = w
            excluded[i] = not math.isfinite(w)
        return out, excluded

    def ln_log_slope_arr(self, ln_g: np.ndarray) -> np.ndarray:
        ln_g = np.asarray(ln_g, dtype=float)
        if self.is_identity:
            return -ln_g
        if self.kind == _TSALLIS:
            return -self.q * ln_g
        return np.array([self.ln_log_slope(v) for v in ln_g])

    def h_of(self, x: np.ndarray) -> np.ndarray:
        """h applied to linear-domain populations (kinetics path); h(0) is
        the exact limit at zero (0 for q > 1, exp(-1/(1-q)) for q < 1)."""
        x = np.asarray(x, dtype=float)
        if self.is_identity:
            return x.copy()
        with np.errstate(divide="ignore"):
            ln_x = np.log(x)
        if self.kind == _TSALLIS:
            u = 1.0 - self.q
            return np.exp(np.expm1(u * ln_x) / u)
        out = np.empty(x.shape)
        for i, v in enumerate(ln_x):
            out[i] = 0.0 if v == -math.inf else math.exp(self.ln_h_hook(v))
        return out

    def ln_h_of_linear(self, x: np.ndarray) -> np.ndarray:
        """ln h on linear-domain populations (entropy integrand)."""
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            ln_x = np.log(x)
        if self.is_identity:
            return ln_x
        if self.kind == _TSALLIS:
            u = 1.0 - self.q
            return np.expm1(u * ln_x) / u
        return np.array([self.ln_h_hook(v) for v in ln_x])

    # -- custom-family validation ----------------------------------------

    def _probe(self, probe_ln_g: "np.ndarray | None") -> None:
        if None in (self.ln_h_hook, self.ln_H_hook, self.slope_hook):
            raise SqueezeDomainError("custom families must supply all three hooks")
        grid = probe_ln_g if probe_ln_g is not None else np.linspace(-3.0, 3.0, 13)
        for ln_g in grid:
            ln_h = self.ln_h_hook(ln_g)
            back = self.ln_H_hook(ln_h)
            if not math.isfinite(back) or abs(back - ln_g) > 1e-8 * max(1.0, abs(ln_g)):
                raise SqueezeDomainError(f"custom hooks fail the inverse roundtrip at ln_g={ln_g:g}")
            f = self.slope_hook(ln_g)
            if f < 0:
                raise SqueezeDomainError(f"custom slope negative at ln_g={ln_g:g}")
            step = 1e-6 * max(1.0, abs(ln_g))
            num = (math.exp(self.ln_h_hook(ln_g + step)) - math.exp(self.ln_h_hook(ln_g - step))) / (
                2.0 * step * math.exp(ln_g)
            )
            scale = max(abs(f), abs(num), 1e-12)
            if abs(f - num) / scale > 1e-4:
                raise SqueezeDomainError(
                    f"custom slope inconsistent with dh/dg at ln_g={ln_g:g}: "
                    f"hook {f:g} vs finite difference {num:g}"
                )

    # -- config ------------------------------------------------------------

    @staticmethod
    def from_config(cfg: dict) -> "SqueezeFamily":
        """Build from the {"family": ..., "q": ...} JSON fragment."""
        name = cfg.get("family", _IDENTITY)
        if name == _IDENTITY:
            return SqueezeFamily.identity()
        if name == _TSALLIS:
            if "q" not in cfg:
                raise SqueezeDomainError("tsallis squeeze config requires 'q'")
            return SqueezeFamily.tsallis(float(cfg["q"]))
        raise SqueezeDomainError(f"unknown squeeze family {name!r} (custom is code-level only)")

    def to_config(self) -> dict:
        if self.kind == _TSALLIS:
            return {"family": _TSALLIS, "q": self.q}
        if self.kind == _IDENTITY:
            return {"family": _IDENTITY}
        raise SqueezeDomainError("custom families have no config form")

    def label(self) -> str:
        if self.kind == _TSALLIS:
            return f"tsallis(q={self.q:g})"
        return self.kind


def squeeze_log(family: SqueezeFamily, ln_g: "LogValue | float") -> LogValue:
    """ln h(g) for g given as ln g."""
    hi, lo = _as_pair(ln_g)
    out_hi, out_lo = family._squeeze_pair(hi, lo)
    return LogValue(ln_x=out_hi, ln_x_lo=out_lo)


def unsqueeze_log(family: SqueezeFamily, ln_h: "LogValue | float") -> LogValue:
    """ln H(x) for x given as ln x; excluded state when x is at or below
    the deformed-exponential cutoff."""
    hi, lo = _as_pair(ln_h)
    out = family._unsqueeze_pair(hi, lo)
    if out == -math.inf:
        return EXCLUDED
    return LogValue(ln_x=out)


def squeeze_slope(family: SqueezeFamily, ln_g: "LogValue | float") -> SqueezeSlope:
    """Slope pair (dh/dx, ln of d(ln h)/dx) at g = exp(ln_g)."""
    hi, _ = _as_pair(ln_g)
    return SqueezeSlope(df_dg=family.slope(hi), ln_ratio=family.ln_log_slope(hi))
