"""Closed forms for layered circle packings.

With M = 6 + k0, the sphere sizes of a layered graph are governed by

    c_0 = 0, δ_0 = 1,  c_n = c_{n-1} + h_n δ_{n-1},  δ_n = δ_{n-1} + d_n c_n,

and |S_{θ_{n-1} + l}| = M (c_{n-1} + l δ_{n-1}) for 1 <= l <= h_n.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .criteria import SeriesVerdict, partial_sums
from .sequences import LayerSpec, SpecExhausted, fraction_str
from .triangulation import TriangulationWindow, spheres

ULP = 2.0 ** -52


@dataclass
class LayerSequences:
    """θ_n, c_n, δ_n (index 0..n_max), λ_n and α_n (None where undefined)."""

    spec: LayerSpec
    n_max: int
    h: list[int | None]
    d: list[int | None]
    theta: list[int]
    c: list[int]
    delta: list[int]
    lam: list[Fraction | None]
    alpha: list[Fraction | None]

    @property
    def M(self) -> int:
        return 6 + self.spec.k0

    def sphere_size(self, m: int) -> int:
        """|S_m| from the closed form, for 1 <= m <= θ_{n_max}."""
        if m == 0:
            return 1
        for n in range(1, self.n_max + 1):
            if m <= self.theta[n]:
                return self.M * (self.c[n - 1] + (m - self.theta[n - 1]) * self.delta[n - 1])
        raise ValueError(f"layer {m} lies beyond θ_{self.n_max} = {self.theta[self.n_max]}")

    def excess(self, m: int) -> int:
        """k_m = k0 + Σ_{θ_j <= m} d_j M c_j."""
        total = self.spec.k0
        for n in range(1, self.n_max + 1):
            if self.theta[n] <= m:
                total += self.d[n] * self.M * self.c[n]
        if m > self.theta[self.n_max]:
            raise ValueError(f"layer {m} lies beyond θ_{self.n_max}")
        return total

    def identity_residuals(self) -> list[tuple[int, int]]:
        """(δ_n - δ_{n-1} - d_n c_n, c_n - c_{n-1} - h_n δ_{n-1}) for n >= 1."""
        return [(self.delta[n] - self.delta[n - 1] - self.d[n] * self.c[n],
                 self.c[n] - self.c[n - 1] - self.h[n] * self.delta[n - 1]) for n in range(1, self.n_max + 1)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        vel = vel_closed_form(self.spec, self.n_max, self) if self.n_max else []
        writer.writerow(["n", "h", "d", "theta", "c", "delta", "lambda", "alpha", "vel"])
        for n in range(self.n_max + 1):
            writer.writerow([n, self.h[n] or "", self.d[n] or "", self.theta[n], self.c[n], self.delta[n],
                             fraction_str(self.lam[n]) if self.lam[n] is not None else "",
                             fraction_str(self.alpha[n]) if self.alpha[n] is not None else "",
                             fraction_str(vel[n - 1]) if n else ""])
        return buf.getvalue()


def harmonic_tail(h: int) -> Fraction:
    """λ = 1/2 + ... + 1/(h+1)."""
    return sum((Fraction(1, j) for j in range(2, h + 2)), Fraction(0))


def layer_sequences(spec: LayerSpec, n_max: int) -> LayerSequences:
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    h: list[int | None] = [None]
    d: list[int | None] = [None]
    theta, c, delta = [0], [0], [1]
    lam: list[Fraction | None] = [None]
    alpha: list[Fraction | None] = [None]
    for n in range(1, n_max + 1):
        try:
            hn = spec.h_at(n)
        except SpecExhausted:
            raise SpecExhausted(f"h_{n} is not defined by the layer data") from None
        try:
            dn = spec.d_at(n)
        except SpecExhausted:
            # the last layer's d only enters δ_n; keep the other quantities
            if n < n_max:
                raise SpecExhausted(f"d_{n} is not defined by the layer data") from None
            dn = None
        h.append(hn)
        d.append(dn)
        theta.append(theta[-1] + hn)
        c.append(c[-1] + hn * delta[-1])
        delta.append(delta[-1] + (dn or 0) * c[-1])
        lam.append(harmonic_tail(hn))
        if n >= 2:
            alpha.append(Fraction(1, hn * d[n - 1])
                         + Fraction(c[n - 1] - c[n - 2], h[n - 1] * d[n - 1] * c[n - 1]))
        else:
            alpha.append(None)
    if d[-1] is None and n_max:
        d[-1] = 0
    return LayerSequences(spec, n_max, h, d, theta, c, delta, lam, alpha)


@dataclass(frozen=True)
class CrossCheck:
    c_residuals: list[Fraction]                      # c_n - |S_{θ_n}| / M, n = 1..n_max
    sphere_residuals: list[tuple[int, int]]          # (m, |S_m| - closed form) for 1 <= m <= θ_{n_max}

    @property
    def exact(self) -> bool:
        return all(r == 0 for r in self.c_residuals) and all(r == 0 for _, r in self.sphere_residuals)


def cross_check_c(spec: LayerSpec, window: TriangulationWindow, n_max: int) -> CrossCheck:
    """Compare the recurrence with BFS sphere sizes of a generated window."""
    seqs = layer_sequences(spec, n_max)
    top = seqs.theta[n_max]
    if window.complete_radius is not None and window.complete_radius < top:
        raise ValueError(f"window radius {window.complete_radius} < θ_{n_max} = {top}")
    sizes = [len(s) for s in spheres(window, window.root)]
    if len(sizes) <= top:
        raise ValueError(f"window reaches only distance {len(sizes) - 1}")
    M = seqs.M
    c_res = [Fraction(seqs.c[n]) - Fraction(sizes[seqs.theta[n]], M) for n in range(1, n_max + 1)]
    s_res = [(m, sizes[m] - seqs.sphere_size(m)) for m in range(1, top + 1)]
    return CrossCheck(c_res, s_res)


def _rules_decide(spec: LayerSpec) -> bool:
    """Every registered rule keeps ln h_n = O(n); with d c growing at least like 2^n the series converge."""
    return (spec.h.rule is not None and spec.d.rule is not None
            and spec.h.rule.growth() is not None and spec.d.rule.growth() is not None)


def _ln_series(name: str, numerators: list[float], denominators: list[int], start: int,
               decided: bool, why: str) -> SeriesVerdict:
    terms = [x / y if x else 0.0 for x, y in zip(numerators, denominators)]
    sums = partial_sums(terms, start)
    err = sum(abs(t) for t in terms) * 2 * ULP * (len(terms) + 1)
    if decided:
        return SeriesVerdict(name, sums, "convergent", why, err)
    return SeriesVerdict(name, sums, "undecided", "prefix only", err)


def series_LCP(spec: LayerSpec, n_max: int) -> tuple[SeriesVerdict, SeriesVerdict]:
    """Σ_{n>=2} ln h_n / (d_{n-1} c_{n-1}) and its ln(h_n + 1) companion.

    Divergence of the first is CP parabolicity.  The two converge or diverge
    together.  Terms with h_n = 1 are exactly zero in the first series.
    """
    seqs = layer_sequences(spec, n_max)
    idx = range(2, n_max + 1)
    den = [seqs.d[n - 1] * seqs.c[n - 1] for n in idx]
    decided = _rules_decide(spec)
    why = "comparison: ln h_n = O(n) under the rule while d_{n-1} c_{n-1} >= 2^(n-2)"
    first = _ln_series("sum ln h_n / (d_{n-1} c_{n-1})", [math.log(seqs.h[n]) for n in idx], den, 2, decided, why)
    second = _ln_series("sum ln(h_n + 1) / (d_{n-1} c_{n-1})", [math.log(seqs.h[n] + 1) for n in idx], den, 2,
                        decided, why)
    return first, second


def product_lower_bounds(spec: LayerSpec, n_max: int) -> list[tuple[int, int, int]]:
    """(n, c_n, Π_{j<=n} h_j): the recurrence gives c_n >= Π h_j."""
    seqs = layer_sequences(spec, n_max)
    out, prod = [], 1
    for n in range(1, n_max + 1):
        prod *= seqs.h[n]
        out.append((n, seqs.c[n], prod))
    return out


@dataclass(frozen=True)
class AlphaRow:
    n: int
    alpha: Fraction
    bound: Fraction | None     # 1/h_n + 1/h_{n-1} for n >= 3
    ok: bool
    beta: Fraction             # d_n c_n / Π_{k<=n} d_k h_k


def series_corollary_LCP(spec: LayerSpec, n_max: int) -> tuple[SeriesVerdict, list[AlphaRow]]:
    """Σ_n ln h_n / Π_{k<n} d_k h_k together with the α_n table.

    c_n = (1 + α_n) h_n d_{n-1} c_{n-1} for n >= 2; each row checks
    0 <= α_n <= 1/h_n + 1/h_{n-1} (n >= 3) and reports d_n c_n / Π d_k h_k,
    which stays bounded when Σ 1/h_n converges.
    """
    seqs = layer_sequences(spec, n_max)
    products = [1]
    for n in range(1, n_max + 1):
        products.append(products[-1] * seqs.d[n] * seqs.h[n] if seqs.d[n] else products[-1] * seqs.h[n])
    numer = [math.log(seqs.h[n]) for n in range(1, n_max + 1)]
    verdict = _ln_series("sum ln h_n / prod_{k<n} d_k h_k", numer, products[:n_max], 1, _rules_decide(spec),
                         "comparison: ln h_n = O(n) under the rule against a product of factors >= 1")
    rows = []
    for n in range(2, n_max + 1):
        a = seqs.alpha[n]
        if (1 + a) * seqs.h[n] * seqs.d[n - 1] * seqs.c[n - 1] != seqs.c[n]:
            raise AssertionError(f"α_{n} does not reproduce c_{n}")
        bound = Fraction(1, seqs.h[n]) + Fraction(1, seqs.h[n - 1]) if n >= 3 else None
        ok = a >= 0 and (bound is None or a <= bound)
        beta = Fraction(seqs.d[n] * seqs.c[n], products[n]) if seqs.d[n] else Fraction(seqs.c[n], products[n])
        rows.append(AlphaRow(n, a, bound, ok, beta))
    return verdict, rows


def vel_closed_form(spec: LayerSpec, n_max: int, seqs: LayerSequences | None = None) -> list[Fraction]:
    """VEL(w0, T_n) = 1 + λ_1/M + (1/M) Σ_{k=2}^n λ_k / δ_{k-1} for n = 1..n_max."""
    seqs = seqs or layer_sequences(spec, n_max)
    M = seqs.M
    out = []
    value = 1 + seqs.lam[1] / M
    out.append(value)
    for k in range(2, n_max + 1):
        value += seqs.lam[k] / (M * seqs.delta[k - 1])
        out.append(value)
    return out


def vel_upper_bounds(spec: LayerSpec, n_max: int) -> list[float]:
    """The same sums with λ_k replaced by ln(h_k + 1) >= λ_k."""
    seqs = layer_sequences(spec, n_max)
    M = seqs.M
    out = []
    value = 1 + math.log(seqs.h[1] + 1) / M
    out.append(value)
    for k in range(2, n_max + 1):
        value += math.log(seqs.h[k] + 1) / (M * seqs.delta[k - 1])
        out.append(value)
    return out


def table(spec: LayerSpec, n_max: int) -> list[dict[str, Any]]:
    """Rows for export: sequences, series partial sums and the VEL closed form."""
    seqs = layer_sequences(spec, n_max)
    vel = vel_closed_form(spec, n_max, seqs)
    rows = []
    acc1 = acc2 = 0.0
    for n in range(1, n_max + 1):
        if n >= 2:
            den = seqs.d[n - 1] * seqs.c[n - 1]
            acc1 += math.log(seqs.h[n]) / den
            acc2 += math.log(seqs.h[n] + 1) / den
        rows.append({"n": n, "theta": seqs.theta[n], "delta": seqs.delta[n], "c": seqs.c[n],
                     "lambda": fraction_str(seqs.lam[n]), "sum_ln_h": acc1, "sum_ln_h1": acc2,
                     "vel": fraction_str(vel[n - 1])})
    return rows


__all__ = [
    "LayerSequences", "harmonic_tail", "layer_sequences", "CrossCheck", "cross_check_c",
    "series_LCP", "product_lower_bounds", "AlphaRow", "series_corollary_LCP",
    "vel_closed_form", "vel_upper_bounds", "table",
]
