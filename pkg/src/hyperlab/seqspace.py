"""Exact sparse sequence vectors and symbolic shift-type operators.

Vectors live in l^p(N) or l^p(Z) and are stored as finite index -> coefficient
maps, so shift orbits of finitely supported vectors stay finitely supported and
carry no truncation error.  Weight sequences are generator rules (not arrays);
their running products switch to log-magnitude accumulation once they leave the
comfortable floating range, which keeps horizon-10^6 orbits free of silent
overflow.

Operator conventions, with w_n the weight at index n:

    backward unilateral   B e_0 = 0,  B e_n = w_n e_{n-1}
    forward unilateral    F e_n = w_{n+1} e_{n+1}
    backward bilateral    T e_n = w_n e_{n-1}          (n in Z)
    forward bilateral     S e_n = w_n e_{n+1}          (n in Z)
    diagonal              D e_n = w_n e_n
    polynomial of shift   sum_m c_m (base)^m

Right inverses shift the other way and divide by the matching weight product,
so applying the operator m times after its m-step right inverse is the
identity, exactly.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Iterator, Mapping, Sequence

__all__ = [
    "COEFF_GUARD",
    "Domain",
    "SeqVector",
    "WeightSeq",
    "WeightPrefix",
    "WeightOverflowError",
    "TaylorPoly",
    "ShiftKind",
    "ShiftOp",
    "apply",
    "apply_right_inverse",
    "shift_power_apply",
    "adjoint",
    "iterate_orbit",
    "lp_norm",
    "hermitian_inner",
    "bilinear_pair",
    "subset_sum_bound_check",
    "SubsetSumReport",
    "vector_to_json",
    "vector_from_json",
]

# Canonical sparse form drops coefficients below this magnitude (subnormal
# guard).  This is the only place a coefficient is ever silently lost.
COEFF_GUARD = 1e-300

# Weight products are multiplied directly while they stay inside this
# magnitude window and tracked as (log magnitude, phase) outside it.
_DIRECT_LO = 1e-150
_DIRECT_HI = 1e150
_LOG_FLOAT_MAX = math.log(1e308)


class Domain(Enum):
    NATURALS = "naturals"
    INTEGERS = "integers"


class WeightOverflowError(ArithmeticError):
    """A weight product left the representable floating range.

    Carries the index range whose product overflowed so callers can report
    the offending term.
    """

    def __init__(self, start: int, stop: int, log_magnitude: float):
        self.start = start
        self.stop = stop
        self.log_magnitude = log_magnitude
        super().__init__(
            f"weight product over indices [{start}, {stop}] has log-magnitude "
            f"{log_magnitude:.3g}, outside floating range"
        )


# ---------------------------------------------------------------------------
# vectors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeqVector:
    """Finitely supported vector, canonical sparse form.

    `p_exponent` records the ambient norm context; it is not per-entry data.
    """

    entries: dict
    domain: Domain = Domain.NATURALS
    p_exponent: float = 2.0

    def __post_init__(self):
        clean = {}
        for idx, c in self.entries.items():
            c = complex(c)
            if abs(c) < COEFF_GUARD:
                continue
            if self.domain is Domain.NATURALS and idx < 0:
                raise ValueError(f"negative index {idx} in a naturals-domain vector")
            clean[int(idx)] = c
        object.__setattr__(self, "entries", clean)
        if not 1.0 <= self.p_exponent < math.inf:
            raise ValueError("p_exponent must lie in [1, inf)")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, domain: Domain = Domain.NATURALS, p: float = 2.0) -> "SeqVector":
        return cls({}, domain, p)

    @classmethod
    def basis(cls, n: int, domain: Domain = Domain.NATURALS, p: float = 2.0) -> "SeqVector":
        return cls({n: 1.0 + 0.0j}, domain, p)

    @classmethod
    def geometric(cls, lam: complex, n_trunc: int, p: float = 2.0) -> "SeqVector":
        """Truncation of (1, lam, lam^2, ...) at index n_trunc inclusive."""
        return cls({n: complex(lam) ** n for n in range(n_trunc + 1)}, Domain.NATURALS, p)

    # -- basic queries -----------------------------------------------------

    def coeff(self, n: int) -> complex:
        return self.entries.get(n, 0.0 + 0.0j)

    def support(self) -> tuple:
        return tuple(sorted(self.entries))

    def is_zero(self) -> bool:
        return not self.entries

    def __len__(self) -> int:
        return len(self.entries)

    # -- linear structure --------------------------------------------------

    def add(self, other: "SeqVector") -> "SeqVector":
        if other.domain is not self.domain:
            raise ValueError("cannot add vectors over different index domains")
        out = dict(self.entries)
        for idx, c in other.entries.items():
            out[idx] = out.get(idx, 0.0) + c
        return SeqVector(out, self.domain, self.p_exponent)

    def scale(self, c: complex) -> "SeqVector":
        c = complex(c)
        return SeqVector({i: c * v for i, v in self.entries.items()}, self.domain, self.p_exponent)

    def __add__(self, other: "SeqVector") -> "SeqVector":
        return self.add(other)

    def __sub__(self, other: "SeqVector") -> "SeqVector":
        return self.add(other.scale(-1.0))

    def __rmul__(self, c: complex) -> "SeqVector":
        return self.scale(c)


def lp_norm(v: SeqVector, p: float | None = None) -> float:
    """(sum |c|^p)^(1/p) over the stored entries; exact for finite support."""
    if p is None:
        p = v.p_exponent
    if not 1.0 <= p < math.inf:
        raise ValueError("p must lie in [1, inf)")
    if not v.entries:
        return 0.0
    mags = [abs(c) for c in v.entries.values()]
    top = max(mags)
    if top == 0.0:
        return 0.0
    # scale by the max so that huge/tiny supports do not overflow the powers
    return top * (sum((m / top) ** p for m in mags)) ** (1.0 / p)


def hermitian_inner(u: SeqVector, v: SeqVector) -> complex:
    """<u, v> = sum u_n conj(v_n)."""
    if len(v.entries) < len(u.entries):
        return sum(u.coeff(i) * c.conjugate() for i, c in v.entries.items())
    return sum(c * v.coeff(i).conjugate() for i, c in u.entries.items())


def bilinear_pair(u: SeqVector, v: SeqVector) -> complex:
    """Duality pairing sum u_n v_n (no conjugation)."""
    if len(v.entries) < len(u.entries):
        return sum(u.coeff(i) * c for i, c in v.entries.items())
    return sum(c * v.coeff(i) for i, c in u.entries.items())


# ---------------------------------------------------------------------------
# weight rules
# ---------------------------------------------------------------------------

def _poly_eval(coeffs: Sequence[float], n: int) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * n + c
    return acc


@dataclass(frozen=True)
class WeightSeq:
    """Rule producing the weight w_n for any requested index.

    Kinds:
      constant        w_n = value
      rational_ratio  w_n = P(n)/Q(n) with real polynomial coefficients
      table           finite table with optional default outside the range
      step            two-sided constant: low below the split index, high from it
    """

    kind: str
    params: tuple
    domain: Domain = Domain.NATURALS

    @classmethod
    def constant(cls, value: complex, domain: Domain = Domain.NATURALS) -> "WeightSeq":
        return cls("constant", (complex(value),), domain)

    @classmethod
    def ratio(cls, num: Sequence[float], den: Sequence[float],
              domain: Domain = Domain.NATURALS) -> "WeightSeq":
        return cls("rational_ratio", (tuple(float(c) for c in num),
                                      tuple(float(c) for c in den)), domain)

    @classmethod
    def table(cls, values: Sequence[complex], start: int = 1,
              default: complex | None = None,
              domain: Domain = Domain.NATURALS) -> "WeightSeq":
        dv = None if default is None else complex(default)
        return cls("table", (int(start), tuple(complex(v) for v in values), dv), domain)

    @classmethod
    def step(cls, low: complex, high: complex, split: int = 1,
             domain: Domain = Domain.INTEGERS) -> "WeightSeq":
        return cls("step", (int(split), complex(low), complex(high)), domain)

    def weight(self, n: int) -> complex:
        if self.domain is Domain.NATURALS and n < 0:
            raise ValueError(f"weight index {n} out of the naturals domain")
        if self.kind == "constant":
            w = self.params[0]
        elif self.kind == "rational_ratio":
            num, den = self.params
            d = _poly_eval(den, n)
            if d == 0.0:
                raise ValueError(f"rational weight rule has zero denominator at n={n}")
            w = complex(_poly_eval(num, n) / d)
        elif self.kind == "table":
            start, values, default = self.params
            if start <= n < start + len(values):
                w = values[n - start]
            elif default is not None:
                w = default
            else:
                raise ValueError(f"weight index {n} outside the table range")
        elif self.kind == "step":
            split, low, high = self.params
            w = high if n >= split else low
        else:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if w == 0:
            raise ValueError(f"zero weight encountered at index {n}")
        return w

    def log_abs(self, n: int) -> float:
        return math.log(abs(self.weight(n)))

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        def cx(c):
            return [c.real, c.imag]

        if self.kind == "constant":
            params = {"value": cx(self.params[0])}
        elif self.kind == "rational_ratio":
            params = {"num": list(self.params[0]), "den": list(self.params[1])}
        elif self.kind == "table":
            start, values, default = self.params
            params = {"start": start, "values": [cx(v) for v in values],
                      "default": None if default is None else cx(default)}
        else:
            split, low, high = self.params
            params = {"split": split, "low": cx(low), "high": cx(high)}
        return {"kind": self.kind, "domain": self.domain.value, "params": params}

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "WeightSeq":
        kind = d["kind"]
        domain = Domain(d.get("domain", "naturals"))
        p = d["params"]

        def cx(v):
            return complex(v[0], v[1])

        if kind == "constant":
            return cls.constant(cx(p["value"]), domain)
        if kind == "rational_ratio":
            return cls.ratio(p["num"], p["den"], domain)
        if kind == "table":
            default = p.get("default")
            return cls.table([cx(v) for v in p["values"]], p.get("start", 1),
                             None if default is None else cx(default), domain)
        if kind == "step":
            return cls.step(cx(p["low"]), cx(p["high"]), p.get("split", 1), domain)
        raise ValueError(f"unknown weight kind {kind!r}")


def weight_log_product(w: WeightSeq, start: int, stop: int) -> tuple[float, float]:
    """(log magnitude, phase) of w_start * ... * w_stop; empty range gives (0, 0)."""
    logmag = 0.0
    phase = 0.0
    for n in range(start, stop + 1):
        c = w.weight(n)
        logmag += math.log(abs(c))
        phase += cmath.phase(c)
    return logmag, phase


def weight_product(w: WeightSeq, start: int, stop: int) -> complex:
    """Exact product w_start * ... * w_stop with a log-space fallback.

    Direct multiplication is used while the running magnitude stays inside
    [1e-150, 1e150]; outside that window the product is carried as
    (log magnitude, phase).  A final value beyond float range raises
    WeightOverflowError; below the coefficient guard it flushes to zero.
    """
    prod = 1.0 + 0.0j
    direct = True
    logmag = 0.0
    phase = 0.0
    for n in range(start, stop + 1):
        c = w.weight(n)
        if direct:
            prod *= c
            mag = abs(prod)
            if not (_DIRECT_LO < mag < _DIRECT_HI) or mag == 0.0:
                direct = False
                logmag = math.log(mag) if mag > 0.0 else -math.inf
                phase = cmath.phase(prod)
        else:
            logmag += math.log(abs(c))
            phase += cmath.phase(c)
    if direct:
        return prod
    if logmag > _LOG_FLOAT_MAX:
        raise WeightOverflowError(start, stop, logmag)
    if logmag < math.log(COEFF_GUARD):
        return 0.0 + 0.0j
    return cmath.rect(math.exp(logmag), phase)


def _inverse_weight_product(w: WeightSeq, start: int, stop: int) -> complex:
    """1 / (w_start ... w_stop) with the same overflow/flush policy."""
    logmag, phase = weight_log_product(w, start, stop)
    if -logmag > _LOG_FLOAT_MAX:
        raise WeightOverflowError(start, stop, -logmag)
    if -logmag < math.log(COEFF_GUARD):
        return 0.0 + 0.0j
    # reconstruct through the direct product when it is comfortably ranged,
    # to keep round-off at one division instead of exp/log
    if abs(logmag) < 300.0:
        return 1.0 / weight_product(w, start, stop)
    return cmath.rect(math.exp(-logmag), -phase)


_PREFIX_CAP = 20_000_000  # total cached indices across one rule


class WeightPrefix:
    """Cached cumulative log-magnitudes and phases of a weight rule.

    L(m) = sum_{t=1}^m log|w_t| for m >= 1, L(0) = 0, and
    L(m) = -sum_{t=m+1}^0 log|w_t| for m < 0 on integer-domain rules, so a
    product over [s, e] costs two lookups after the arrays are grown.  The
    overflow/flush policy matches `weight_product`: beyond float range the
    product raises WeightOverflowError, below the coefficient guard it
    flushes to zero.
    """

    def __init__(self, w: WeightSeq):
        self.w = w
        self._pos_log = [0.0]    # L(0), L(1), ...
        self._pos_ph = [0.0]
        self._neg_log = [0.0]    # L(0), L(-1), ... (integer domain only)
        self._neg_ph = [0.0]

    def _grow_to(self, m: int) -> None:
        if m >= 0:
            while len(self._pos_log) <= m:
                if len(self._pos_log) + len(self._neg_log) > _PREFIX_CAP:
                    raise ValueError("weight prefix cache exceeds the desk-scale cap")
                t = len(self._pos_log)
                c = self.w.weight(t)
                self._pos_log.append(self._pos_log[-1] + math.log(abs(c)))
                self._pos_ph.append(self._pos_ph[-1] + cmath.phase(c))
        else:
            if self.w.domain is not Domain.INTEGERS:
                raise ValueError("negative prefix index on a naturals rule")
            while len(self._neg_log) <= -m:
                if len(self._pos_log) + len(self._neg_log) > _PREFIX_CAP:
                    raise ValueError("weight prefix cache exceeds the desk-scale cap")
                t = 1 - len(self._neg_log)  # next weight index going down: 0, -1, ...
                c = self.w.weight(t)
                self._neg_log.append(self._neg_log[-1] - math.log(abs(c)))
                self._neg_ph.append(self._neg_ph[-1] - cmath.phase(c))

    def log_abs(self, m: int) -> float:
        self._grow_to(m)
        return self._pos_log[m] if m >= 0 else self._neg_log[-m]

    def _phase(self, m: int) -> float:
        return self._pos_ph[m] if m >= 0 else self._neg_ph[-m]

    def _build(self, logmag: float, phase: float, start: int, stop: int) -> complex:
        if logmag > _LOG_FLOAT_MAX:
            raise WeightOverflowError(start, stop, logmag)
        if logmag < math.log(COEFF_GUARD):
            return 0.0 + 0.0j
        return cmath.rect(math.exp(logmag), phase)

    def _direct(self, start: int, stop: int) -> complex:
        prod = 1.0 + 0.0j
        for t in range(start, stop + 1):
            prod *= self.w.weight(t)
        return prod

    def product(self, start: int, stop: int) -> complex:
        """w_start * ... * w_stop (empty when stop < start).

        Short comfortably-ranged products multiply directly (exact up to one
        rounding per factor); long or extreme ones go through the log table.
        """
        if stop < start:
            return 1.0 + 0.0j
        lm = self.log_abs(stop) - self.log_abs(start - 1)
        ph = self._phase(stop) - self._phase(start - 1)
        if stop - start < 128 and abs(lm) < 300.0:
            return self._direct(start, stop)
        return self._build(lm, ph, start, stop)

    def inverse_product(self, start: int, stop: int) -> complex:
        if stop < start:
            return 1.0 + 0.0j
        lm = self.log_abs(start - 1) - self.log_abs(stop)
        ph = self._phase(start - 1) - self._phase(stop)
        if stop - start < 128 and abs(lm) < 300.0:
            return 1.0 / self._direct(start, stop)
        return self._build(lm, ph, start, stop)


# ---------------------------------------------------------------------------
# polynomials and shift operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TaylorPoly:
    """Polynomial c_0 + c_1 z + ... + c_M z^M, trailing coefficient nonzero."""

    coeffs: tuple
    radius: float = math.inf  # radius of absolute convergence marker

    def __post_init__(self):
        cs = tuple(complex(c) for c in self.coeffs)
        while len(cs) > 1 and cs[-1] == 0:
            cs = cs[:-1]
        object.__setattr__(self, "coeffs", cs if cs else (0.0 + 0.0j,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z: complex) -> complex:
        if abs(z) >= self.radius:
            raise ValueError(f"|z| = {abs(z)} outside the convergence radius")
        acc = 0.0 + 0.0j
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc


class ShiftKind(Enum):
    BACKWARD = "backward_unilateral"
    FORWARD = "forward_unilateral"
    BACKWARD_BILATERAL = "backward_bilateral"
    FORWARD_BILATERAL = "forward_bilateral"
    DIAGONAL = "diagonal"
    POLY_OF_SHIFT = "polynomial_of_shift"


_UNILATERAL = {ShiftKind.BACKWARD, ShiftKind.FORWARD}
_BILATERAL = {ShiftKind.BACKWARD_BILATERAL, ShiftKind.FORWARD_BILATERAL}


@dataclass(frozen=True)
class ShiftOp:
    kind: ShiftKind
    weights: WeightSeq | None = None
    poly: TaylorPoly | None = None
    base: "ShiftOp | None" = None

    def __post_init__(self):
        if self.kind is ShiftKind.POLY_OF_SHIFT:
            if self.poly is None or self.base is None:
                raise ValueError("polynomial-of-shift needs poly and base")
            if self.base.kind not in _UNILATERAL | _BILATERAL | {ShiftKind.DIAGONAL}:
                raise ValueError("polynomial base must be a plain shift or diagonal")
        else:
            if self.weights is None:
                raise ValueError(f"{self.kind.value} needs a weight rule")
            if self.kind in _BILATERAL and self.weights.domain is not Domain.INTEGERS:
                raise ValueError("bilateral shifts need integer-domain weights")
            if self.kind in _UNILATERAL and self.weights.domain is not Domain.NATURALS:
                raise ValueError("unilateral shifts need naturals-domain weights")

    # -- constructors ------------------------------------------------------

    @classmethod
    def backward(cls, w: WeightSeq) -> "ShiftOp":
        return cls(ShiftKind.BACKWARD, w)

    @classmethod
    def forward(cls, mu: WeightSeq) -> "ShiftOp":
        return cls(ShiftKind.FORWARD, mu)

    @classmethod
    def bilateral_backward(cls, a: WeightSeq) -> "ShiftOp":
        return cls(ShiftKind.BACKWARD_BILATERAL, a)

    @classmethod
    def bilateral_forward(cls, b: WeightSeq) -> "ShiftOp":
        return cls(ShiftKind.FORWARD_BILATERAL, b)

    @classmethod
    def diagonal(cls, lam: WeightSeq) -> "ShiftOp":
        return cls(ShiftKind.DIAGONAL, lam)

    @classmethod
    def polynomial(cls, poly: TaylorPoly, base: "ShiftOp") -> "ShiftOp":
        return cls(ShiftKind.POLY_OF_SHIFT, None, poly, base)

    @property
    def domain(self) -> Domain:
        if self.kind is ShiftKind.POLY_OF_SHIFT:
            return self.base.domain
        return Domain.INTEGERS if self.kind in _BILATERAL else self.weights.domain

    def displacement_range(self) -> tuple[int, int]:
        """(min, max) index displacement of a single application."""
        if self.kind in (ShiftKind.BACKWARD, ShiftKind.BACKWARD_BILATERAL):
            return (-1, -1)
        if self.kind in (ShiftKind.FORWARD, ShiftKind.FORWARD_BILATERAL):
            return (1, 1)
        if self.kind is ShiftKind.DIAGONAL:
            return (0, 0)
        lo, hi = self.base.displacement_range()
        deg = self.poly.degree
        return (min(0, lo * deg), max(0, hi * deg))


def _check_domains(op: ShiftOp, v: SeqVector) -> None:
    if op.domain is not v.domain:
        raise ValueError(
            f"operator over {op.domain.value} applied to a {v.domain.value} vector"
        )


def apply(op: ShiftOp, v: SeqVector) -> SeqVector:
    """Exact image of v under a single application of op."""
    _check_domains(op, v)
    k = op.kind
    if k is ShiftKind.POLY_OF_SHIFT:
        acc = v.scale(op.poly.coeffs[0])
        power = v
        for c in op.poly.coeffs[1:]:
            power = apply(op.base, power)
            if c != 0:
                acc = acc.add(power.scale(c))
        return acc

    w = op.weights
    out: dict = {}
    if k is ShiftKind.BACKWARD:
        for n, c in v.entries.items():
            if n >= 1:
                out[n - 1] = out.get(n - 1, 0.0) + w.weight(n) * c
    elif k is ShiftKind.FORWARD:
        for n, c in v.entries.items():
            out[n + 1] = out.get(n + 1, 0.0) + w.weight(n + 1) * c
    elif k is ShiftKind.BACKWARD_BILATERAL:
        for n, c in v.entries.items():
            out[n - 1] = out.get(n - 1, 0.0) + w.weight(n) * c
    elif k is ShiftKind.FORWARD_BILATERAL:
        for n, c in v.entries.items():
            out[n + 1] = out.get(n + 1, 0.0) + w.weight(n) * c
    elif k is ShiftKind.DIAGONAL:
        for n, c in v.entries.items():
            out[n] = w.weight(n) * c
    else:  # pragma: no cover
        raise ValueError(f"unhandled kind {k}")
    return SeqVector(out, v.domain, v.p_exponent)


def apply_right_inverse(op: ShiftOp, v: SeqVector, m: int) -> SeqVector:
    """m-step right inverse: e_n -> e_{n+m} / (w_{n+1} ... w_{n+m}).

    For a backward shift this is a genuine right inverse: m applications of
    the operator afterwards restore v exactly.  For a forward shift the same
    index arithmetic gives the right inverse of its backward adjoint (the
    dual-side map the orbit machinery wants); diagonals invert entrywise with
    overflow guarded.
    """
    _check_domains(op, v)
    if m < 0:
        raise ValueError("m must be a natural number")
    if m == 0:
        return v
    k = op.kind
    if k is ShiftKind.POLY_OF_SHIFT:
        raise ValueError("polynomial-of-shift has no canonical right inverse")
    w = op.weights
    out: dict = {}
    if k is ShiftKind.DIAGONAL:
        for n, c in v.entries.items():
            lam = w.weight(n)
            neg_log = -m * math.log(abs(lam))
            if neg_log > _LOG_FLOAT_MAX:
                raise WeightOverflowError(n, n, neg_log)
            if neg_log < math.log(COEFF_GUARD):
                continue
            out[n] = c * (lam ** (-m))
    else:
        for n, c in v.entries.items():
            coeff = _inverse_weight_product(w, n + 1, n + m)
            val = coeff * c
            if val != 0:
                out[n + m] = out.get(n + m, 0.0) + val
    return SeqVector(out, v.domain, v.p_exponent)


def shift_power_apply(op: ShiftOp, v: SeqVector, m: int) -> SeqVector:
    """T^m v in one jump via closed-form weight products.

    Equivalent to applying `apply` m times but O(support) regardless of m.
    Polynomial-of-shift operators fall back to repeated application.
    """
    _check_domains(op, v)
    if m < 0:
        raise ValueError("m must be a natural number")
    if m == 0:
        return v
    k = op.kind
    if k is ShiftKind.POLY_OF_SHIFT:
        out = v
        for _ in range(m):
            out = apply(op, out)
        return out
    w = op.weights
    out: dict = {}
    for n, c in v.entries.items():
        if k is ShiftKind.BACKWARD:
            if n < m:
                continue  # the orbit fell off the bottom: B^m e_n = 0 for n < m
            val = weight_product(w, n - m + 1, n) * c
            tgt = n - m
        elif k is ShiftKind.BACKWARD_BILATERAL:
            val = weight_product(w, n - m + 1, n) * c
            tgt = n - m
        elif k is ShiftKind.FORWARD:
            val = weight_product(w, n + 1, n + m) * c
            tgt = n + m
        elif k is ShiftKind.FORWARD_BILATERAL:
            val = weight_product(w, n, n + m - 1) * c
            tgt = n + m
        else:  # diagonal
            val = (w.weight(n) ** m) * c
            tgt = n
        if val != 0:
            out[tgt] = out.get(tgt, 0.0) + val
    return SeqVector(out, v.domain, v.p_exponent)


def adjoint(op: ShiftOp) -> ShiftOp:
    """Dual-side action on coefficient functionals (bilinear pairing).

    Backward and forward swap while keeping the same weight rule; a diagonal
    is its own adjoint; a polynomial of a shift becomes the same polynomial
    of the adjoint base.
    """
    k = op.kind
    if k is ShiftKind.POLY_OF_SHIFT:
        return ShiftOp.polynomial(op.poly, adjoint(op.base))
    swap = {
        ShiftKind.BACKWARD: ShiftKind.FORWARD,
        ShiftKind.FORWARD: ShiftKind.BACKWARD,
        ShiftKind.BACKWARD_BILATERAL: ShiftKind.FORWARD_BILATERAL,
        ShiftKind.FORWARD_BILATERAL: ShiftKind.BACKWARD_BILATERAL,
        ShiftKind.DIAGONAL: ShiftKind.DIAGONAL,
    }
    return ShiftOp(swap[k], op.weights)


def iterate_orbit(op: ShiftOp, x0: SeqVector, horizon: int,
                  stride_exponent: int = 1) -> Iterator[SeqVector]:
    """Lazy orbit stream.

    With stride_exponent 1, yields T^n x0 for n = 1..horizon.  With a larger
    exponent q, iterates step by step but yields only the points T^(k^q) x0
    with k^q <= horizon (the sub-sampling the q-density machinery wants).
    """
    if horizon < 1 or stride_exponent < 1:
        raise ValueError("horizon and stride exponent must be >= 1")
    cur = x0
    k = 1
    for n in range(1, horizon + 1):
        cur = apply(op, cur)
        if stride_exponent == 1:
            yield cur
        elif n == k ** stride_exponent:
            yield cur
            k += 1


# ---------------------------------------------------------------------------
# the factor-4 subset bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubsetSumReport:
    lhs: float
    rhs: float
    holds: bool
    sup_abs_lambda: float
    sup_subset_norm: float


def subset_sum_bound_check(xs: Sequence[SeqVector], lambdas: Sequence[complex],
                           F: Sequence[int], tol: float = 1e-12) -> SubsetSumReport:
    """Check ||sum_{n in F} lambda_n x_n|| <= 4 sup|lambda| sup_{G <= F} ||sum_G x_n||.

    The right-hand supremum enumerates all 2^|F| subsets (Gray-code walk with
    an incrementally maintained power sum), so |F| is capped at 20.
    """
    F = list(F)
    if len(F) > 20:
        raise ValueError("|F| > 20: exhaustive subset enumeration refused")
    if not F:
        return SubsetSumReport(0.0, 0.0, True, 0.0, 0.0)
    p = xs[F[0]].p_exponent
    domain = xs[F[0]].domain

    weighted = SeqVector.zero(domain, p)
    for n in F:
        weighted = weighted.add(xs[n].scale(lambdas[n]))
    lhs = lp_norm(weighted, p)
    sup_lam = max(abs(lambdas[n]) for n in F)

    # Gray-code walk over subsets: one vector flips per step, and the running
    # sum-of-|c|^p is patched only at the touched indices.
    cur: dict = {}
    power_sum = 0.0
    sup_norm = 0.0  # includes the empty subset
    for step in range(1, 2 ** len(F)):
        bit = (step & -step).bit_length() - 1
        flip = F[bit]
        sign = 1.0 if ((step ^ (step >> 1)) >> bit) & 1 else -1.0
        for idx, c in xs[flip].entries.items():
            old = cur.get(idx, 0.0 + 0.0j)
            new = old + sign * c
            power_sum += abs(new) ** p - abs(old) ** p
            if new == 0:
                cur.pop(idx, None)
            else:
                cur[idx] = new
        if power_sum > 0.0:
            sup_norm = max(sup_norm, power_sum ** (1.0 / p))

    rhs = 4.0 * sup_lam * sup_norm
    return SubsetSumReport(lhs, rhs, lhs <= rhs + tol, sup_lam, sup_norm)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def vector_to_json(v: SeqVector) -> list:
    return [{"index": n, "re": c.real, "im": c.imag}
            for n, c in sorted(v.entries.items())]


def vector_from_json(items: Iterable[Mapping], domain: Domain = Domain.NATURALS,
                     p: float = 2.0) -> SeqVector:
    return SeqVector({int(it["index"]): complex(it["re"], it["im"]) for it in items},
                     domain, p)
