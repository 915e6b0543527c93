"""Exact arithmetic for the geometric bucketing: eps', q, t and ceiling logarithms.

Every quantity here is a :class:`fractions.Fraction` or an ``int``; nothing
touches floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Union

RationalLike = Union[Fraction, int, str]

#: Fractional bits kept when eps' has to be rounded down to a dyadic rational.
DYADIC_BITS = 64


class NumericsError(ValueError):
    pass


def parse_rational(text: RationalLike) -> Fraction:
    """Parse ``"0.5"``, ``"1/2"``, ``"3"`` (or pass through ints/Fractions)."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise NumericsError(f"not a rational number: {text!r}") from exc


def _exact_sqrt(x: Fraction) -> Fraction | None:
    a, b = x.numerator, x.denominator
    ra, rb = isqrt(a), isqrt(b)
    if ra * ra == a and rb * rb == b:
        return Fraction(ra, rb)
    return None


def _below_root(r: Fraction, eps: Fraction) -> bool:
    return r * r + 3 * r <= eps


def eps_prime_of(eps: RationalLike, bits: int = DYADIC_BITS) -> Fraction:
    """Lower bound on the positive root of ``x**2 + 3*x == eps``.

    Returns the root itself when it is rational, otherwise the largest
    ``N / 2**bits`` that does not exceed it.
    """
    eps = parse_rational(eps)
    if eps <= 0:
        raise NumericsError("epsilon must be positive")
    disc = 9 + 4 * eps
    root = _exact_sqrt(disc)
    if root is not None:
        return (root - 3) / 2
    # floor(sqrt(disc) * 2**(bits-1)) - 3 * 2**(bits-1) approximates floor(root * 2**bits)
    half = 1 << (bits - 1)
    s = isqrt(disc.numerator * half * half // disc.denominator)
    n = s - 3 * half
    scale = 1 << bits
    while n > 0 and not _below_root(Fraction(n, scale), eps):
        n -= 1
    while _below_root(Fraction(n + 1, scale), eps):
        n += 1
    if n <= 0:
        raise NumericsError(
            f"epsilon {eps} is too small: eps' rounds to zero at {bits} fractional bits"
        )
    return Fraction(n, scale)


def _power_at_least(q: Fraction, k: int, alpha: Fraction) -> bool:
    """Decide ``q**k >= alpha`` with integer cross-multiplication."""
    a, b = q.numerator, q.denominator
    c, d = alpha.numerator, alpha.denominator
    if k >= 0:
        return a**k * d >= c * b**k
    j = -k
    return b**j * d >= c * a**j


def ceil_log(q: RationalLike, alpha: RationalLike) -> int:
    """Smallest integer ``k`` with ``q**k >= alpha``; ``-1`` when ``alpha == 0``."""
    q = parse_rational(q)
    alpha = parse_rational(alpha)
    if q <= 1:
        raise NumericsError("logarithm base must exceed 1")
    if alpha < 0:
        raise NumericsError("logarithm argument must be nonnegative")
    if alpha == 0:
        return -1
    if _power_at_least(q, 0, alpha):
        # answer lies in (lo, 0]
        hi, step = 0, 1
        while _power_at_least(q, -step, alpha):
            hi, step = -step, step * 2
        lo = -step
    else:
        lo, step = 0, 1
        while not _power_at_least(q, step, alpha):
            lo, step = step, step * 2
        hi = step
    # invariant: q**lo < alpha <= q**hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _power_at_least(q, mid, alpha):
            hi = mid
        else:
            lo = mid
    return hi


def compute_t(p: int, eps_prime: Fraction, q: Fraction) -> int:
    """Bucket count ``max(1, 1 + ceil_log(q, p / eps'))``."""
    return max(1, 1 + ceil_log(q, Fraction(p) / eps_prime))


def mu_init(p: int, max_value: int, q: Fraction) -> int:
    """Starting target ``ceil_log(q, p * M)`` (``-1`` when ``M == 0``)."""
    return ceil_log(q, p * max_value)


@dataclass(frozen=True)
class ApproxParams:
    eps: Fraction
    eps_prime: Fraction
    q: Fraction
    t: int

    @classmethod
    def build(
        cls, eps: RationalLike, p: int, eps_prime: RationalLike | None = None
    ) -> "ApproxParams":
        """Derive eps', q and t for budget ``p``.

        An explicit ``eps_prime`` is accepted if it is positive and satisfies
        ``eps'**2 + 3*eps' <= eps``.
        """
        eps = parse_rational(eps)
        if eps <= 0:
            raise NumericsError("epsilon must be positive")
        if eps_prime is None:
            ep = eps_prime_of(eps)
        else:
            ep = parse_rational(eps_prime)
            if ep <= 0 or not _below_root(ep, eps):
                raise NumericsError(
                    f"eps' = {ep} must be positive with eps'^2 + 3 eps' <= {eps}"
                )
        q = 1 + ep
        return cls(eps=eps, eps_prime=ep, q=q, t=compute_t(p, ep, q))

    def neg_powers(self) -> list[Fraction]:
        """``q**-k`` for ``k`` in ``0..t``."""
        out = [Fraction(1)]
        inv = 1 / self.q
        for _ in range(self.t):
            out.append(out[-1] * inv)
        return out

    def to_dict(self) -> dict:
        return {
            "eps": str(self.eps),
            "eps_prime": str(self.eps_prime),
            "q": str(self.q),
            "t": self.t,
        }
