"""Boolean predicates as explicit truth tables, plus the spectral and
correlation analysis used to classify them.

Conventions fixed here and relied on everywhere else:

* truth-table index: argument 1 is the least significant bit, so
  ``table[k]`` is the predicate applied to the binary expansion of ``k``;
* spectral transform: field values 0, 1 map to the reals +1, -1, and the
  coefficient for a variable subset S is the expectation of the transformed
  output times the product of the transformed inputs over S.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional

import numpy as np

MAX_ARITY = 24  # table of 2^24 bits stays under 16 MiB

_LEVEL_TOL = 1e-9


def _as_bit_array(bits, length=None) -> np.ndarray:
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.ndim != 1:
        raise ValueError("expected a flat bit vector")
    if length is not None and arr.shape[0] != length:
        raise ValueError(f"expected {length} bits, got {arr.shape[0]}")
    if arr.size and arr.max() > 1:
        raise ValueError("bit vector entries must be 0 or 1")
    return arr


def _walsh_hadamard(signs: np.ndarray) -> np.ndarray:
    """In-place butterfly transform of a +/-1 vector, returned as int64."""
    a = signs.astype(np.int64).copy()
    h = 1
    while h < a.shape[0]:
        a = a.reshape(-1, 2 * h)
        left = a[:, :h].copy()
        right = a[:, h:].copy()
        a[:, :h] = left + right
        a[:, h:] = left - right
        a = a.reshape(-1)
        h *= 2
    return a


@dataclass(frozen=True)
class Predicate:
    """A d-ary Boolean function stored as its full truth table."""

    arity: int
    table: np.ndarray

    def __post_init__(self):
        if not (1 <= self.arity <= MAX_ARITY):
            raise ValueError(f"arity must be in [1, {MAX_ARITY}]")
        table = _as_bit_array(self.table, length=1 << self.arity)
        table = table.copy()
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @classmethod
    def from_table(cls, bits) -> "Predicate":
        bits = _as_bit_array(bits)
        arity = int(bits.shape[0]).bit_length() - 1
        if (1 << arity) != bits.shape[0]:
            raise ValueError("table length must be a power of two")
        return cls(arity, bits)

    @classmethod
    def from_function(cls, arity: int, fn) -> "Predicate":
        idx = np.arange(1 << arity)
        bits = [fn(*(((k >> i) & 1) for i in range(arity))) for k in idx]
        return cls(arity, np.array(bits, dtype=np.uint8))

    # -- evaluation ---------------------------------------------------------

    def eval(self, x) -> int:
        """Apply the predicate to one d-bit input."""
        bits = _as_bit_array(x, length=self.arity)
        index = int(bits @ (1 << np.arange(self.arity, dtype=np.int64)))
        return int(self.table[index])

    def is_constant(self) -> bool:
        total = int(self.table.sum())
        return total == 0 or total == self.table.shape[0]

    # -- analysis -----------------------------------------------------------

    def bias(self) -> Fraction:
        """Probability of output 1 on uniform input, as an exact dyadic."""
        return Fraction(int(self.table.sum()), int(self.table.shape[0]))

    def fourier(self) -> np.ndarray:
        """Spectral coefficients indexed by subset bitmask.

        Entry ``S`` (bit i set means variable i+1 is in the subset) equals
        the expectation, over uniform input, of the +/-1 output times the
        parity character of the subset. Computed exactly: an integer
        fast transform divided by 2^d, both representable in float64.
        """
        signs = 1 - 2 * self.table.astype(np.int64)
        return _walsh_hadamard(signs) / float(1 << self.arity)

    def correlation_order(self) -> Optional[int]:
        """Smallest positive subset size whose parity the output correlates
        with, found by exhaustive counting over subsets and inputs.

        Returns None for constant predicates, where the notion is undefined.
        """
        witnesses = self.correlation_witnesses()
        if not witnesses:
            return None
        return len(witnesses[0])

    def correlation_witnesses(self) -> list[tuple[int, ...]]:
        """All minimal-size subsets correlated with the output, in
        lexicographic order; empty for constant predicates.

        Subsets use 0-based variable positions.
        """
        if self.is_constant():
            return []
        d = self.arity
        idx = np.arange(1 << d)
        half = 1 << (d - 1)
        for size in range(1, d + 1):
            found = []
            for subset in combinations(range(d), size):
                parity = np.zeros(1 << d, dtype=np.uint8)
                for i in subset:
                    parity ^= ((idx >> i) & 1).astype(np.uint8)
                agreements = int((self.table == parity).sum())
                if agreements != half:
                    found.append(subset)
            if found:
                return found
        # a non-constant predicate always correlates with some subset
        raise AssertionError("unreachable: no correlated subset found")

    def is_sensitive(self) -> bool:
        """True when some variable flips the output on every input."""
        idx = np.arange(1 << self.arity)
        for i in range(self.arity):
            if np.all(self.table != self.table[idx ^ (1 << i)]):
                return True
        return False

    def bounded_bias(self, c1: float, c2: float) -> bool:
        """True when the bias lies inside the closed interval [c1, c2]."""
        if not (0.0 < c1 <= c2 < 1.0):
            raise ValueError("bounds must satisfy 0 < c1 <= c2 < 1")
        eta = self.bias()
        return c1 <= eta <= c2

    def profile(self, bias_bounds=None) -> "PredicateProfile":
        """Full analysis record; cross-checks the subset scan against the
        minimal nonzero spectral level before returning."""
        spectrum = self.fourier()
        order = self.correlation_order()
        if order is not None:
            masks = np.arange(1, spectrum.shape[0])
            nonzero = np.abs(spectrum[1:]) > _LEVEL_TOL
            levels = np.array([bin(m).count("1") for m in masks])
            min_level = int(levels[nonzero].min())
            if min_level != order:
                raise AssertionError(
                    f"correlation scan gave {order} but minimal spectral "
                    f"level is {min_level}"
                )
        bounded = None
        if bias_bounds is not None:
            bounded = self.bounded_bias(*bias_bounds)
        return PredicateProfile(
            bias=self.bias(),
            fourier=spectrum,
            correlation_order=order,
            correlation_witnesses=self.correlation_witnesses(),
            sensitive=self.is_sensitive(),
            bounded_bias=bounded,
            bias_bounds=tuple(bias_bounds) if bias_bounds else None,
        )

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        """Wire format: bit k of the table is bit (k mod 8) of hex byte k//8."""
        packed = np.packbits(self.table, bitorder="little")
        return {"d": self.arity, "table_hex": packed.tobytes().hex()}

    @classmethod
    def from_json(cls, obj: dict) -> "Predicate":
        arity = int(obj["d"])
        if not (1 <= arity <= MAX_ARITY):
            raise ValueError(f"arity must be in [1, {MAX_ARITY}]")
        raw = bytes.fromhex(obj["table_hex"])
        expected = ((1 << arity) + 7) // 8
        if len(raw) != expected:
            raise ValueError(f"table_hex must encode {expected} bytes")
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8),
                             bitorder="little")[: 1 << arity]
        return cls(arity, bits)


@dataclass(frozen=True)
class PredicateProfile:
    bias: Fraction
    fourier: np.ndarray
    correlation_order: Optional[int]
    correlation_witnesses: list
    sensitive: bool
    bounded_bias: Optional[bool]
    bias_bounds: Optional[tuple] = None

    def as_dict(self) -> dict:
        out = {
            "bias": float(self.bias),
            "bias_exact": f"{self.bias.numerator}/{self.bias.denominator}",
            "correlation_order": (
                "constant" if self.correlation_order is None
                else self.correlation_order
            ),
            "correlation_witnesses": [list(w) for w in self.correlation_witnesses],
            "sensitive": self.sensitive,
        }
        if self.bias_bounds is not None:
            out["bounded_bias"] = {
                "c1": self.bias_bounds[0],
                "c2": self.bias_bounds[1],
                "ok": self.bounded_bias,
            }
        return out


@dataclass(frozen=True)
class NoisyPredicate:
    """A deterministic base predicate whose output gets an independent
    Bernoulli noise bit added per evaluation."""

    base: Predicate
    noise_rate: float

    def __post_init__(self):
        if not (0.0 <= self.noise_rate < 0.5):
            raise ValueError("noise rate must lie in [0, 1/2)")

    @property
    def arity(self) -> int:
        return self.base.arity

    def eval_noisy(self, x, rng: np.random.Generator) -> int:
        """Base output XOR one fresh Bernoulli(noise_rate) bit."""
        flip = int(rng.random() < self.noise_rate)
        return self.base.eval(x) ^ flip

    def bias(self) -> float:
        """Output bias after noise: eta(1-beta) + (1-eta)beta."""
        eta = float(self.base.bias())
        beta = self.noise_rate
        return eta * (1.0 - beta) + (1.0 - eta) * beta

    def to_json(self) -> dict:
        out = self.base.to_json()
        out["beta"] = self.noise_rate
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "NoisyPredicate":
        return cls(Predicate.from_json(obj), float(obj["beta"]))


def base_of(pred) -> Predicate:
    """The deterministic predicate underlying ``pred`` (identity if already
    deterministic)."""
    return pred.base if isinstance(pred, NoisyPredicate) else pred


def output_bias(pred) -> float:
    """Bias of one output bit, noise-convolved for noisy predicates."""
    return float(pred.bias())


_BUILTIN_FUNCTIONS = {
    "identity": (1, lambda x1: x1),
    "xor2": (2, lambda x1, x2: x1 ^ x2),
    "and2": (2, lambda x1, x2: x1 & x2),
    "xor3": (3, lambda x1, x2, x3: x1 ^ x2 ^ x3),
    "maj3": (3, lambda x1, x2, x3: int(x1 + x2 + x3 >= 2)),
    "xor-and-3-2": (5, lambda x1, x2, x3, x4, x5: x1 ^ x2 ^ x3 ^ (x4 & x5)),
}


def builtin(name: str) -> Predicate:
    """Look up a named built-in predicate."""
    try:
        arity, fn = _BUILTIN_FUNCTIONS[name]
    except KeyError:
        raise ValueError(
            f"unknown builtin predicate {name!r}; "
            f"known: {', '.join(sorted(_BUILTIN_FUNCTIONS))}"
        ) from None
    return Predicate.from_function(arity, fn)


def builtin_names() -> list[str]:
    return sorted(_BUILTIN_FUNCTIONS)
