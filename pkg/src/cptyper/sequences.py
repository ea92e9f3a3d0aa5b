"""Integer sequences given by a finite prefix and an optional closed-form tail.

Sequences carry a growth description so that series built from them can be
classified symbolically.  A sequence with no closed-form tail only ever
produces partial sums.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence as TypingSequence


class SpecError(ValueError):
    """Raised for malformed or invalid specifications."""


class SpecExhausted(SpecError):
    """Raised when a finite prefix is too short for the requested range."""


# ---------------------------------------------------------------------------
# growth classes


@dataclass(frozen=True)
class Growth:
    """Asymptotic growth class of a positive sequence x_n.

    kind is one of ``bounded``, ``polynomial`` (with ``degree``), ``nlogn``
    (eventually at most C n ln n), ``geometric`` (eventually at least C r^n
    with r > 1) or ``interleave`` (odd and even subsequences in ``parts``).
    """

    kind: str
    degree: int = 0
    parts: tuple["Growth", ...] = ()

    def reciprocal_sum_diverges(self) -> bool | None:
        """Whether sum 1/x_n diverges, or None when the class cannot tell."""
        if self.kind == "bounded":
            return True
        if self.kind == "polynomial":
            return self.degree <= 1
        if self.kind == "nlogn":
            return True
        if self.kind == "geometric":
            return False
        if self.kind == "interleave":
            verdicts = [p.reciprocal_sum_diverges() for p in self.parts]
            if any(v is True for v in verdicts):
                return True
            if all(v is False for v in verdicts):
                return False
        return None

    def _at_most_nlogn(self) -> bool:
        if self.kind in ("bounded", "nlogn"):
            return True
        return self.kind == "polynomial" and self.degree <= 1

    def pair_sum(self) -> "Growth | None":
        """Growth class of x_n + x_{n+1}, when it can be named."""
        if self.kind != "interleave":
            return self
        return None

    def pair_reciprocal_sum_diverges(self) -> bool | None:
        """Whether sum 1/(x_n + x_{n+1}) diverges.

        For interleaved sequences every consecutive pair contains one term of
        each part, so a convergent part forces convergence, and two parts of
        at most n log n growth force divergence.
        """
        if self.kind != "interleave":
            return self.reciprocal_sum_diverges()
        verdicts = [p.reciprocal_sum_diverges() for p in self.parts]
        if any(v is False for v in verdicts):
            return False
        if all(p._at_most_nlogn() for p in self.parts):
            return True
        return None

    def describe(self) -> str:
        if self.kind == "polynomial":
            return f"polynomial(degree={self.degree})"
        if self.kind == "interleave":
            return "interleave(" + ", ".join(p.describe() for p in self.parts) + ")"
        return self.kind


# ---------------------------------------------------------------------------
# closed-form rules


@dataclass(frozen=True)
class Rule:
    """A registered closed-form rule evaluated at integer indices."""

    name: str
    params: tuple = ()

    def __call__(self, i: int) -> int:
        name, p = self.name, self.params
        if name == "constant":
            return int(p[0])
        if name == "polynomial":
            return int(sum(c * i**j for j, c in enumerate(p)))
        if name == "geometric":
            scale, ratio = p[0], p[1]
            shift = p[2] if len(p) > 2 else 0
            return int(scale * ratio**i + shift)
        if name == "log":
            return int(math.floor(p[0] * math.log(i))) if i >= 1 else 0
        if name == "interleave":
            odd, even = p
            return odd((i + 1) // 2) if i % 2 else even(i // 2)
        raise SpecError(f"unknown rule {name!r}")

    def growth(self) -> Growth | None:
        """Growth class of the rule values, assuming they stay positive."""
        name, p = self.name, self.params
        if name == "constant":
            return Growth("bounded")
        if name == "polynomial":
            coeffs = list(p)
            while coeffs and coeffs[-1] == 0:
                coeffs.pop()
            if not coeffs or len(coeffs) == 1:
                return Growth("bounded")
            if coeffs[-1] < 0:
                return None
            return Growth("polynomial", len(coeffs) - 1)
        if name == "geometric":
            scale, ratio = p[0], p[1]
            if ratio > 1 and scale > 0:
                return Growth("geometric")
            if ratio == 1:
                return Growth("bounded")
            return None
        if name == "log":
            return Growth("nlogn") if p[0] > 0 else Growth("bounded")
        if name == "interleave":
            parts = tuple(sub.growth() for sub in p)
            if any(g is None for g in parts):
                return None
            return Growth("interleave", parts=parts)
        return None

    def to_dict(self) -> dict[str, Any]:
        if self.name == "interleave":
            return {"rule": "interleave", "odd": self.params[0].to_dict(),
                    "even": self.params[1].to_dict()}
        return {"rule": self.name, "params": list(self.params)}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Rule":
        name = data.get("rule")
        if name == "interleave":
            return cls("interleave", (cls.from_dict(data["odd"]), cls.from_dict(data["even"])))
        if name not in ("constant", "polynomial", "geometric", "log"):
            raise SpecError(f"unknown rule {name!r}")
        params = tuple(data.get("params", ()))
        if not params:
            raise SpecError(f"rule {name!r} needs params")
        return cls(name, params)


def constant(c: int) -> Rule:
    return Rule("constant", (c,))


def polynomial(*coeffs: int) -> Rule:
    """Rule sum_j coeffs[j] * i**j."""
    return Rule("polynomial", tuple(coeffs))


def geometric(scale: int, ratio: int, shift: int = 0) -> Rule:
    """Rule scale * ratio**i + shift."""
    return Rule("geometric", (scale, ratio, shift))


def log_rule(c: float) -> Rule:
    """Rule floor(c ln i) (0 at i = 0)."""
    return Rule("log", (c,))


def interleave(odd: Rule, even: Rule) -> Rule:
    """Rule taking odd((i+1)/2) at odd i and even(i/2) at even i."""
    return Rule("interleave", (odd, even))


# ---------------------------------------------------------------------------
# sequences


@dataclass(frozen=True)
class IntSequence:
    """Integer sequence x_start, x_{start+1}, ... from a prefix and a tail rule."""

    prefix: tuple[int, ...] = ()
    rule: Rule | None = None
    start: int = 0

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(int(x) for x in self.prefix))

    @property
    def finite(self) -> bool:
        return self.rule is None

    @property
    def stop(self) -> int | None:
        """One past the last defined index, or None for infinite sequences."""
        return None if self.rule is not None else self.start + len(self.prefix)

    def __getitem__(self, i: int) -> int:
        if i < self.start:
            raise IndexError(f"index {i} below sequence start {self.start}")
        j = i - self.start
        if j < len(self.prefix):
            return self.prefix[j]
        if self.rule is None:
            raise SpecExhausted(f"sequence defined only up to index {self.start + len(self.prefix) - 1}")
        return self.rule(i)

    def take(self, stop: int) -> list[int]:
        """Values at indices start, ..., stop - 1."""
        return [self[i] for i in range(self.start, stop)]

    def growth(self) -> Growth | None:
        return None if self.rule is None else self.rule.growth()

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"values": list(self.prefix)}
        if self.rule is not None:
            out["tail"] = self.rule.to_dict()
        return out

    @classmethod
    def from_data(cls, data: Any, start: int) -> "IntSequence":
        """Build from a plain list, or a dict with ``values`` and ``tail``."""
        if data is None:
            return cls((), None, start)
        if isinstance(data, (list, tuple)):
            return cls(tuple(data), None, start)
        if isinstance(data, dict):
            if "rule" in data:
                return cls((), Rule.from_dict(data), start)
            tail = data.get("tail")
            return cls(tuple(data.get("values", ())), Rule.from_dict(tail) if tail else None, start)
        raise SpecError(f"cannot read a sequence from {data!r}")


def seq(values: Iterable[int] = (), rule: Rule | None = None, start: int = 0) -> IntSequence:
    return IntSequence(tuple(values), rule, start)


# ---------------------------------------------------------------------------
# degree-excess specifications


@dataclass(frozen=True)
class ExcessSpec:
    """Degree-excess data k_0, k_1, ... and the derived a_n = sum_{j<n}(k_j + 6).

    Either ``k`` (indexed from 0) or ``a`` (indexed from 1) is given; the other
    is derived through k_n = a_{n+1} - a_n - 6 and a_1 = k_0 + 6.
    """

    k: IntSequence | None = None
    a: IntSequence | None = None
    name: str = ""

    def __post_init__(self):
        if (self.k is None) == (self.a is None):
            raise SpecError("give exactly one of k and a")
        if self.k is not None and self.k.start != 0:
            raise SpecError("k is indexed from 0")
        if self.a is not None and self.a.start != 1:
            raise SpecError("a is indexed from 1")

    def k_at(self, n: int) -> int:
        if self.k is not None:
            return self.k[n]
        return self.a[n + 1] - self.a_at(n) - 6 if n >= 1 else self.a[1] - 6

    def a_at(self, n: int) -> int:
        """a_n for n >= 1 (a_0 = 0 by the empty sum)."""
        if n == 0:
            return 0
        if self.a is not None:
            return self.a[n]
        return sum(self.k[j] + 6 for j in range(n))

    def a_values(self, n_max: int) -> list[int]:
        """[a_1, ..., a_{n_max}] computed incrementally and validated (a_n >= 3)."""
        out, total = [], 0
        for n in range(1, n_max + 1):
            if self.a is not None:
                total = self.a[n]
            else:
                total += self.k[n - 1] + 6
            if total < 3:
                raise SpecError(f"a_{n} = {total} < 3")
            out.append(total)
        return out

    def k_values(self, n_max: int) -> list[int]:
        """[k_0, ..., k_{n_max}]."""
        if self.k is not None:
            return [self.k[n] for n in range(n_max + 1)]
        a = [0] + self.a_values(n_max + 1)
        return [a[n + 1] - a[n] - 6 for n in range(n_max + 1)]

    def available(self) -> int | None:
        """Largest n with a_n defined, or None when infinite."""
        if self.a is not None:
            return None if self.a.stop is None else self.a.stop - 1
        return None if self.k.stop is None else self.k.stop

    def a_growth(self) -> Growth | None:
        """Growth class of a_n derived from the closed-form tail, if any."""
        if self.a is not None:
            return self.a.growth()
        rule = self.k.rule
        if rule is None:
            return None
        if rule.name == "constant":
            c = rule.params[0]
            if c + 6 == 0:
                return Growth("bounded")
            return Growth("polynomial", 1) if c + 6 > 0 else None
        if rule.name == "polynomial":
            g = rule.growth()
            if g is None:
                return None
            if g.kind == "bounded":
                c = rule(0)
                if c + 6 == 0:
                    return Growth("bounded")
                return Growth("polynomial", 1) if c + 6 > 0 else None
            return Growth("polynomial", g.degree + 1)
        if rule.name == "geometric":
            g = rule.growth()
            return Growth("geometric") if g is not None and g.kind == "geometric" else None
        if rule.name == "log":
            return Growth("nlogn")
        return None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": "ring_stack"}
        if self.name:
            out["name"] = self.name
        if self.k is not None:
            out["k"] = self.k.to_dict()
        else:
            out["a"] = self.a.to_dict()
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExcessSpec":
        if "k" in data:
            return cls(k=IntSequence.from_data(data["k"], 0), name=data.get("name", ""))
        if "a" in data:
            return cls(a=IntSequence.from_data(data["a"], 1), name=data.get("name", ""))
        raise SpecError("ring_stack spec needs k or a")


def rm1_spec() -> ExcessSpec:
    """k_0 = -3 and k_n = -6 afterwards, so a_n = 3 for every n."""
    return ExcessSpec(k=seq([-3], constant(-6)), name="rm1")


def mixed_spec() -> ExcessSpec:
    """a_{2n-1} = 3^n and a_{2n} = 3: CP parabolic yet transient."""
    return ExcessSpec(a=seq((), interleave(geometric(1, 3), constant(3)), start=1), name="mixed")


# ---------------------------------------------------------------------------
# layered circle packing specifications


@dataclass(frozen=True)
class LayerSpec:
    """Layer data (k0, h_k, d_k): h_k - 1 flat layers followed by a layer of degree 6 + d_k."""

    k0: int
    h: IntSequence
    d: IntSequence
    name: str = ""

    def __post_init__(self):
        if self.k0 + 6 < 3:
            raise SpecError(f"deg v0 = {self.k0 + 6} < 3")
        if self.h.start != 1 or self.d.start != 1:
            raise SpecError("h and d are indexed from 1")

    @classmethod
    def make(cls, k0: int, h: Any, d: Any, name: str = "") -> "LayerSpec":
        h_seq = h if isinstance(h, IntSequence) else IntSequence.from_data(h, 1)
        d_seq = d if isinstance(d, IntSequence) else IntSequence.from_data(d, 1)
        return cls(k0, h_seq, d_seq, name)

    def h_at(self, k: int) -> int:
        value = self.h[k]
        if value < 1:
            raise SpecError(f"h_{k} = {value} < 1")
        return value

    def d_at(self, k: int) -> int:
        value = self.d[k]
        if value < 1:
            raise SpecError(f"d_{k} = {value} < 1")
        return value

    def thetas(self, up_to_layer: int) -> list[int]:
        """θ_1 < θ_2 < ... covering every special layer <= up_to_layer.

        Stops once θ exceeds ``up_to_layer`` (that value is included) or the
        h prefix runs out.
        """
        out, total, k = [], 0, 1
        while total <= up_to_layer:
            try:
                total += self.h_at(k)
            except SpecExhausted:
                break
            out.append(total)
            k += 1
        return out

    def layer_degree(self, m: int) -> int:
        """Degree of every vertex of the sphere S_m."""
        if m == 0:
            return self.k0 + 6
        total, k = 0, 1
        while True:
            try:
                total += self.h_at(k)
            except SpecExhausted:
                raise SpecExhausted(f"layer {m} lies beyond the h prefix") from None
            if total == m:
                try:
                    return 6 + self.d_at(k)
                except SpecExhausted:
                    raise SpecExhausted(f"d_{k} needed for layer {m}") from None
            if total > m:
                return 6
            k += 1

    def max_radius(self) -> int | None:
        """Largest window radius buildable from the layer data (None if unbounded)."""
        if self.h.rule is not None and self.d.rule is not None:
            return None
        r = 1
        # layers 0..R-1 need their degrees
        while True:
            try:
                self.layer_degree(r)
            except SpecExhausted:
                return r
            r += 1
            if r > 10**6:
                return None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": "layered", "k0": self.k0,
                               "h": self.h.to_dict(), "d": self.d.to_dict()}
        if self.name:
            out["name"] = self.name
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "LayerSpec":
        try:
            return cls.make(int(data["k0"]), data.get("h"), data.get("d"), data.get("name", ""))
        except KeyError as exc:
            raise SpecError(f"layered spec missing {exc}") from None


def hexagonal_layer_spec() -> LayerSpec:
    """The flat lattice as a layered spec without special layers."""
    return LayerSpec(0, seq((), constant(10**9), start=1), seq((), constant(1), start=1), "hexagonal")


def seven_regular_spec(k0: int = 1) -> LayerSpec:
    """Every layer special with d = 1; with k0 = 1 every vertex has degree 7."""
    return LayerSpec(k0, seq((), constant(1), start=1), seq((), constant(1), start=1), "seven-regular")


def as_fraction(x: Any) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def fraction_str(x: Fraction) -> str:
    x = as_fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(text: str) -> Fraction:
    return Fraction(text)


__all__ = [
    "Growth", "Rule", "IntSequence", "ExcessSpec", "LayerSpec", "SpecError", "SpecExhausted",
    "constant", "polynomial", "geometric", "log_rule", "interleave", "seq",
    "rm1_spec", "mixed_spec", "hexagonal_layer_spec", "seven_regular_spec",
    "fraction_str", "parse_fraction",
]
