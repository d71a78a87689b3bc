"""Lower-density statistics on the polynomial clock n^q.

The central quantity is the finite-horizon profile of

    card{ n in A : n <= N^q } / N        for N = 1 .. N_max,

whose liminf over N is the q-lower density of the visit set A.  On a desk
horizon the liminf is reported as the minimum of the profile over a tail
window [tail_start, N_max]; for q > 1 the ratios may legitimately exceed 1
(the clock runs faster than the counter).

`visit_set` turns an orbit stream into the set of times the orbit enters a
prescribed ball, with the metric chosen by a NormSpec: an lp norm for
sequence vectors, operator or Schatten norm for matrix windows.
"""

from __future__ import annotations

import csv
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, Sequence

from .matops import MatOp, embed_window, operator_norm, schatten_norm
from .seqspace import SeqVector, lp_norm

__all__ = [
    "NatSet",
    "DensityEstimate",
    "NormSpec",
    "q_lower_density",
    "visit_set",
    "density_to_csv",
    "natset_to_lines",
    "natset_from_lines",
]


@dataclass(frozen=True)
class NatSet:
    """Strictly increasing tuple of naturals together with the horizon that
    was actually searched (membership beyond the horizon is unknown, not
    false)."""

    elems: tuple
    horizon: int

    def __post_init__(self):
        elems = tuple(int(n) for n in self.elems)
        if any(b <= a for a, b in zip(elems, elems[1:])):
            raise ValueError("elements must be strictly increasing")
        if elems and elems[0] < 0:
            raise ValueError("elements must be naturals")
        if self.horizon < 0 or (elems and elems[-1] > self.horizon):
            raise ValueError("elements exceed the stated horizon")
        object.__setattr__(self, "elems", elems)

    @classmethod
    def from_iterable(cls, it: Iterable[int], horizon: int) -> "NatSet":
        return cls(tuple(sorted(set(int(n) for n in it))), horizon)

    def count_leq(self, x: float) -> int:
        return bisect_right(self.elems, x)

    def __contains__(self, n: int) -> bool:
        i = bisect_right(self.elems, n) - 1
        return i >= 0 and self.elems[i] == n

    def __len__(self) -> int:
        return len(self.elems)


@dataclass(frozen=True)
class DensityEstimate:
    q: float
    n_max: int
    tail_start: int
    profile: tuple            # (N, count, ratio) triples for N = 1..n_max
    liminf_proxy: float       # min ratio over N >= tail_start

    def ratio_at(self, N: int) -> float:
        return self.profile[N - 1][2]


def q_lower_density(A: NatSet, q: float, N_max: int,
                    tail_start: int | None = None) -> DensityEstimate:
    """Finite-horizon profile of card{n in A : n <= N^q} / N.

    Requires N_max^q <= A.horizon so every counted threshold was actually
    searched; rejects silently incomplete profiles.
    """
    if q <= 0:
        raise ValueError("q must be positive")
    if N_max < 1:
        raise ValueError("N_max must be >= 1")
    q_int = int(q) if float(q).is_integer() else None
    top = N_max ** q_int if q_int is not None else float(N_max) ** q
    if top > A.horizon:
        raise ValueError(
            f"N_max^q = {top} exceeds the searched horizon {A.horizon}")
    if tail_start is None:
        tail_start = max(1, N_max // 2)
    if not 1 <= tail_start <= N_max:
        raise ValueError("tail_start must lie in [1, N_max]")

    profile = []
    for N in range(1, N_max + 1):
        threshold = N ** q_int if q_int is not None else float(N) ** q
        count = A.count_leq(threshold)
        profile.append((N, count, count / N))
    liminf = min(r for (N, _, r) in profile if N >= tail_start)
    return DensityEstimate(float(q), N_max, tail_start, tuple(profile), liminf)


@dataclass(frozen=True)
class NormSpec:
    """Metric selector for visit detection."""

    kind: str                 # "lp" | "operator" | "schatten"
    p: float | None = None

    @classmethod
    def lp(cls, p: float | None = None) -> "NormSpec":
        return cls("lp", p)

    @classmethod
    def operator(cls) -> "NormSpec":
        return cls("operator", None)

    @classmethod
    def schatten(cls, p: float) -> "NormSpec":
        return cls("schatten", p)

    def distance(self, x, target) -> float:
        if self.kind == "lp":
            if not isinstance(x, SeqVector):
                raise TypeError("lp metric expects sequence vectors")
            return lp_norm(x - target, self.p)
        if not isinstance(x, MatOp):
            raise TypeError(f"{self.kind} metric expects matrix windows")
        lo = min(x.basis_offset, target.basis_offset)
        hi = max(x.basis_offset + max(x.rows, x.cols),
                 target.basis_offset + max(target.rows, target.cols)) - 1
        diff = embed_window(x, lo, hi) - embed_window(target, lo, hi)
        if self.kind == "operator":
            return operator_norm(diff)
        if self.kind == "schatten":
            return schatten_norm(diff, self.p)
        raise ValueError(f"unknown metric kind {self.kind!r}")


def visit_set(orbit: Iterable, target, radius: float, norm: NormSpec) -> NatSet:
    """Times n (1-based position in the orbit stream) with
    distance(orbit_n, target) < radius."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    hits = []
    n = 0
    for x in orbit:
        n += 1
        if norm.distance(x, target) < radius:
            hits.append(n)
    return NatSet(tuple(hits), n)


# ---------------------------------------------------------------------------
# artifacts
# ---------------------------------------------------------------------------

def density_to_csv(est: DensityEstimate, fileobj) -> None:
    writer = csv.writer(fileobj, lineterminator="\n")
    writer.writerow(["N", "count", "ratio"])
    for N, count, ratio in est.profile:
        writer.writerow([N, count, repr(float(ratio))])


def natset_to_lines(A: NatSet) -> str:
    """Newline-delimited elements, preceded by a horizon header line."""
    body = "\n".join(str(n) for n in A.elems)
    return f"# horizon {A.horizon}\n{body}\n" if body else f"# horizon {A.horizon}\n"


def natset_from_lines(text: str) -> NatSet:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("# horizon"):
        raise ValueError("missing horizon header")
    horizon = int(lines[0].split()[-1])
    return NatSet(tuple(int(ln) for ln in lines[1:]), horizon)
