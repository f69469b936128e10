"""Elementary exact number theory shared by the other modules."""

from __future__ import annotations

from dataclasses import dataclass, field

# Levels with a single-eta-quotient Hauptmodul: primes p with (p-1) | 24.
SUPPORTED_LEVELS = (2, 3, 5, 7, 13)

# Genus-zero prime levels that exist but are out of scope here (their
# Hauptmoduls are not a single eta quotient).
UNSUPPORTED_GENUS_ZERO_PRIMES = (11, 17, 19, 23, 29, 31, 41, 47, 59, 71)

_TRIAL_DIVISION_BOUND = 10**6


class UnsupportedLevel(ValueError):
    """Raised for prime levels outside {2, 3, 5, 7, 13}."""


@dataclass(frozen=True)
class PrimeLevel:
    """A prime p with (p-1) | 24, plus the constants of its eta quotient.

    eta_exponent is 24/(p-1), the exponent in f_p = (eta(t)/eta(pt))^exp;
    fricke_const is p^(12/(p-1)), the constant of the Fricke relation
    f_p(-1/(pt)) = fricke_const / f_p(t).
    """

    p: int
    eta_exponent: int = field(init=False)
    fricke_const: int = field(init=False)

    def __post_init__(self):
        if self.p not in SUPPORTED_LEVELS:
            raise UnsupportedLevel(
                f"level {self.p} not supported: need a prime p with (p-1) | 24, "
                f"i.e. p in {SUPPORTED_LEVELS}; the remaining genus-zero primes "
                f"{UNSUPPORTED_GENUS_ZERO_PRIMES} are out of scope"
            )
        object.__setattr__(self, "eta_exponent", 24 // (self.p - 1))
        object.__setattr__(self, "fricke_const", self.p ** (12 // (self.p - 1)))


def is_small_prime(n: int) -> bool:
    """Trial-division primality check, valid for n < 10^12."""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n and f <= _TRIAL_DIVISION_BOUND:
        if n % f == 0:
            return False
        f += 2
    return True


def _jacobi(a: int, n: int) -> int:
    # Jacobi symbol, n odd positive.
    a %= n
    t = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                t = -t
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            t = -t
        a %= n
    return t if n == 1 else 0


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n), totally extended to all integer pairs."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    sign = 1
    if n < 0:
        n = -n
        if a < 0:
            sign = -1
    # factor out twos
    twos = 0
    while n % 2 == 0:
        n //= 2
        twos += 1
    if twos:
        if a % 2 == 0:
            return 0
        if twos % 2 == 1 and a % 8 in (3, 5):
            sign = -sign
    return sign * _jacobi(a, n)


def sqrt_classes(d: int, p: PrimeLevel) -> frozenset[int]:
    """All residues beta mod 2p with beta^2 = -d (mod 4p).

    Empty iff d is not admissible for level p.  The 2p residues are scanned
    exhaustively; p <= 13 makes this free.
    """
    if d < 1:
        return frozenset()
    m = 4 * p.p
    target = (-d) % m
    return frozenset(b for b in range(2 * p.p) if (b * b) % m == target)


def is_admissible(d: int, p: PrimeLevel) -> bool:
    """True iff d >= 1 and -d is a square mod 4p."""
    return d >= 1 and bool(sqrt_classes(d, p))


def is_square_mod(n: int, m: int) -> bool:
    """True iff n is a square modulo m (exhaustive scan; m is tiny here)."""
    n %= m
    return any((b * b) % m == n for b in range(m))


def divisors(n: int) -> list[int]:
    """Positive divisors of n >= 1, ascending."""
    if n < 1:
        raise ValueError("divisors needs n >= 1")
    small, large = [], []
    f = 1
    while f * f <= n:
        if n % f == 0:
            small.append(f)
            if f != n // f:
                large.append(n // f)
        f += 1
    return small + large[::-1]


def moebius(n: int) -> int:
    """Moebius function mu(n) by trial factorization."""
    if n < 1:
        raise ValueError("moebius needs n >= 1")
    mu = 1
    f = 2
    while f * f <= n:
        if n % f == 0:
            n //= f
            if n % f == 0:
                return 0
            mu = -mu
        f += 1
    if n > 1:
        mu = -mu
    return mu


def splits(ell: int, d: int) -> bool:
    """True iff the odd prime ell splits in Q(sqrt(-d))."""
    if ell == 2 or not is_small_prime(ell):
        raise ValueError(f"ell must be an odd prime, got {ell}")
    return kronecker(-d, ell) == 1
