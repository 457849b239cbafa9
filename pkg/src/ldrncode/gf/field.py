"""Prime and extension finite fields with integer element encoding.

An element of GF(p^k) is stored as a single integer ``e`` in ``[0, p^k)``
whose base-p digits are the coefficients of a polynomial of degree < k,
constant term first.
"""

from __future__ import annotations

import itertools
from functools import cached_property

import numpy as np

# Largest field order for which add/mul lookup tables are materialized.
TABLE_LIMIT = 1024
# Keeps products of two residues (and their sums) inside int64.
ORDER_LIMIT = 1 << 31

MODE_PRIME = 0
MODE_TABLE = 1
MODE_GENERIC = 2


class FieldError(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


# ---------------------------------------------------------------------------
# polynomials over GF(p): lists of ints, constant term first, no trailing zeros

def _trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def poly_sub(a, b, p):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return _trim([(x - y) % p for x, y in zip(a, b)])


def poly_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _trim(out)


def poly_divmod(a, b, p):
    a = _trim(a)
    b = _trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    inv_lead = pow(b[-1], p - 2, p)
    quot = [0] * max(len(a) - len(b) + 1, 0)
    rem = list(a)
    while len(rem) >= len(b):
        shift = len(rem) - len(b)
        c = rem[-1] * inv_lead % p
        quot[shift] = c
        for i, y in enumerate(b):
            rem[shift + i] = (rem[shift + i] - c * y) % p
        rem = _trim(rem)
    return _trim(quot), rem


def poly_mod(a, b, p):
    return poly_divmod(a, b, p)[1]


def poly_gcd(a, b, p):
    a, b = _trim(a), _trim(b)
    while b:
        a, b = b, poly_mod(a, b, p)
    if a:
        inv_lead = pow(a[-1], p - 2, p)
        a = [x * inv_lead % p for x in a]
    return a


def poly_powmod(base, e, mod, p):
    result = [1]
    base = poly_mod(base, mod, p)
    while e:
        if e & 1:
            result = poly_mod(poly_mul(result, base, p), mod, p)
        base = poly_mod(poly_mul(base, base, p), mod, p)
        e >>= 1
    return result


def _prime_factors(n):
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def is_irreducible(f, p) -> bool:
    """Rabin's irreducibility test for a monic polynomial over GF(p)."""
    f = _trim(f)
    k = len(f) - 1
    if k < 1:
        return False
    if k == 1:
        return True
    x = [0, 1]
    if poly_sub(poly_powmod(x, p**k, f, p), x, p):
        return False
    for r in _prime_factors(k):
        h = poly_sub(poly_powmod(x, p ** (k // r), f, p), x, p)
        if len(poly_gcd(f, h, p)) != 1:
            return False
    return True


def smallest_irreducible(p: int, k: int) -> tuple[int, ...]:
    """Lexicographically first monic irreducible of degree k (constant term first)."""
    if k == 1:
        return (0, 1)
    for low in itertools.product(range(p), repeat=k):
        if low[0] == 0:
            continue  # divisible by x
        f = list(low) + [1]
        if is_irreducible(f, p):
            return tuple(f)
    raise FieldError(f"no irreducible polynomial of degree {k} over GF({p})")  # pragma: no cover


# ---------------------------------------------------------------------------


class Field:
    """GF(p^k) with canonical integer encoding.

    Scalar methods take and return Python ints. The ``v*`` methods operate
    elementwise on int64 numpy arrays.
    """

    def __init__(self, p: int, k: int = 1, modulus=None):
        if not isinstance(p, (int, np.integer)) or not is_prime(int(p)):
            raise FieldError(f"{p} is not prime")
        if not isinstance(k, (int, np.integer)) or k < 1:
            raise FieldError(f"extension degree must be a positive integer, got {k}")
        p, k = int(p), int(k)
        if p**k >= ORDER_LIMIT:
            raise FieldError(f"field order {p}^{k} overflows the supported range (< 2^31)")
        self.p = p
        self.k = k
        self.q = p**k
        if modulus is None:
            modulus = smallest_irreducible(p, k)
        modulus = tuple(int(c) for c in modulus)
        if len(modulus) != k + 1 or modulus[-1] != 1:
            raise FieldError("modulus must be monic of degree k")
        if k > 1 and not is_irreducible(list(modulus), p):
            raise FieldError(f"modulus {modulus} is reducible over GF({p})")
        self.modulus = modulus
        if k == 1:
            self.mode = MODE_PRIME
        elif self.q <= TABLE_LIMIT:
            self.mode = MODE_TABLE
        else:
            self.mode = MODE_GENERIC

    # identity -------------------------------------------------------------

    def __eq__(self, other):
        return isinstance(other, Field) and (self.p, self.k, self.modulus) == (
            other.p,
            other.k,
            other.modulus,
        )

    def __hash__(self):
        return hash((self.p, self.k, self.modulus))

    def __repr__(self):
        if self.k == 1:
            return f"GF({self.p})"
        return f"GF({self.p}^{self.k})"

    @property
    def order(self) -> int:
        return self.q

    @property
    def is_prime_field(self) -> bool:
        return self.k == 1

    def elements(self):
        return range(self.q)

    # encoding ---------------------------------------------------------------

    def to_coeffs(self, a: int) -> list[int]:
        out = []
        for _ in range(self.k):
            a, r = divmod(a, self.p)
            out.append(r)
        return out

    def from_coeffs(self, coeffs) -> int:
        e = 0
        for c in reversed(list(coeffs)):
            e = e * self.p + int(c) % self.p
        return e

    def check(self, a) -> int:
        a = int(a)
        if not 0 <= a < self.q:
            raise FieldError(f"{a} is not an element of {self!r}")
        return a

    # scalar arithmetic (polynomial path, table-free) ------------------------

    def _poly_add(self, a, b, sign=1):
        if self.p == 2:
            return a ^ b
        out, mult = 0, 1
        for _ in range(self.k):
            a, ra = divmod(a, self.p)
            b, rb = divmod(b, self.p)
            out += ((ra + sign * rb) % self.p) * mult
            mult *= self.p
        return out

    def _poly_mul(self, a, b):
        prod = poly_mul(self.to_coeffs(a), self.to_coeffs(b), self.p)
        return self.from_coeffs(poly_mod(prod, list(self.modulus), self.p))

    def add(self, a: int, b: int) -> int:
        if self.k == 1:
            return (a + b) % self.p
        return self._poly_add(a, b)

    def sub(self, a: int, b: int) -> int:
        if self.k == 1:
            return (a - b) % self.p
        return self._poly_add(a, b, -1)

    def neg(self, a: int) -> int:
        return self.sub(0, a)

    def mul(self, a: int, b: int) -> int:
        if self.k == 1:
            return a * b % self.p
        if self.mode == MODE_TABLE:
            return int(self.mul_table[a, b])
        return self._poly_mul(a, b)

    def pow(self, a: int, e: int) -> int:
        if self.k == 1:
            return pow(a, e, self.p)
        result = 1
        while e:
            if e & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            e >>= 1
        return result

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("division by zero in " + repr(self))
        if self.mode == MODE_TABLE:
            return int(self.inv_table[a])
        return self.pow(a, self.q - 2)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def arith(self, op: str, a: int, b: int | None = None) -> int:
        a = self.check(a)
        if op in ("neg", "inv"):
            return getattr(self, op)(a)
        if b is None:
            raise FieldError(f"operation {op!r} needs two operands")
        b = self.check(b)
        if op not in ("add", "sub", "mul", "div"):
            raise FieldError(f"unknown field operation {op!r}")
        return getattr(self, op)(a, b)

    def embed(self, c: int) -> int:
        """Image of a prime-subfield element (its encoding is unchanged)."""
        return int(c) % self.p

    # lookup tables --------------------------------------------------------

    @cached_property
    def _digits(self) -> np.ndarray:
        e = np.arange(self.q, dtype=np.int64)
        out = np.empty((self.q, self.k), dtype=np.int64)
        for t in range(self.k):
            out[:, t] = e % self.p
            e //= self.p
        return out

    @cached_property
    def _powers(self) -> np.ndarray:
        return self.p ** np.arange(self.k, dtype=np.int64)

    @cached_property
    def add_table(self) -> np.ndarray:
        d = self._digits
        s = (d[:, None, :] + d[None, :, :]) % self.p
        t = s @ self._powers
        t.setflags(write=False)
        return t

    @cached_property
    def neg_table(self) -> np.ndarray:
        t = ((-self._digits) % self.p) @ self._powers
        t.setflags(write=False)
        return t

    @cached_property
    def mul_table(self) -> np.ndarray:
        p, k = self.p, self.k
        d = self._digits
        # reduction of x^k: x^k = -(m_0 + m_1 x + ... + m_{k-1} x^{k-1})
        red = np.array([(-c) % p for c in self.modulus[:k]], dtype=np.int64)
        # shifted[a, t, :] = digits of a * x^t
        shifted = np.empty((self.q, k, k), dtype=np.int64)
        cur = d.copy()
        for t in range(k):
            shifted[:, t, :] = cur
            top = cur[:, k - 1].copy()
            cur = np.concatenate([np.zeros((self.q, 1), dtype=np.int64), cur[:, : k - 1]], axis=1)
            cur = (cur + top[:, None] * red[None, :]) % p
        table = np.empty((self.q, self.q), dtype=np.int64)
        for a in range(self.q):
            prod = (d @ shifted[a]) % p  # row b: sum_t b_t * (a x^t)
            table[a] = prod @ self._powers
        table.setflags(write=False)
        return table

    @cached_property
    def inv_table(self) -> np.ndarray:
        t = np.zeros(self.q, dtype=np.int64)
        a_idx, b_idx = np.nonzero(self.mul_table == 1)
        t[a_idx] = b_idx
        t.setflags(write=False)
        return t

    def kernel_tables(self):
        """(mode, p, add, mul, neg, inv) as consumed by the elimination kernels."""
        if self.mode == MODE_TABLE:
            return self.mode, self.p, self.add_table, self.mul_table, self.neg_table, self.inv_table
        dummy2 = np.zeros((1, 1), dtype=np.int64)
        dummy1 = np.zeros(1, dtype=np.int64)
        return self.mode, self.p, dummy2, dummy2, dummy1, dummy1

    # vectorized elementwise arithmetic -----------------------------------

    @cached_property
    def _ufuncs(self):
        return (
            np.frompyfunc(self.add, 2, 1),
            np.frompyfunc(self.mul, 2, 1),
            np.frompyfunc(self.neg, 1, 1),
        )

    def vadd(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.mode == MODE_PRIME:
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        if self.mode == MODE_TABLE:
            return self.add_table[a, b]
        return self._ufuncs[0](a, b).astype(np.int64)

    def vneg(self, a):
        a = np.asarray(a, dtype=np.int64)
        if self.mode == MODE_PRIME:
            return (-a) % self.p
        if self.p == 2:
            return a.copy()
        if self.mode == MODE_TABLE:
            return self.neg_table[a]
        return self._ufuncs[2](a).astype(np.int64)

    def vsub(self, a, b):
        return self.vadd(a, self.vneg(b))

    def vmul(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.mode == MODE_PRIME:
            return a * b % self.p
        if self.mode == MODE_TABLE:
            return self.mul_table[a, b]
        return self._ufuncs[1](a, b).astype(np.int64)

    def vsum(self, a, axis=0):
        """Field sum along ``axis``."""
        a = np.asarray(a, dtype=np.int64)
        if self.mode == MODE_PRIME:
            return a.sum(axis=axis) % self.p
        a = np.moveaxis(a, axis, 0)
        acc = np.zeros(a.shape[1:], dtype=np.int64)
        for row in a:
            acc = self.vadd(acc, row)
        return acc

    def dot(self, u, v) -> int:
        return int(self.vsum(self.vmul(u, v)))

    def random(self, rng: np.random.Generator, shape=None):
        return rng.integers(0, self.q, size=shape, dtype=np.int64)


_FIELD_CACHE: dict[tuple[int, int], Field] = {}


def field_create(p: int, k: int = 1) -> Field:
    """Return GF(p^k) using the lexicographically smallest irreducible modulus."""
    key = (p, k)
    f = _FIELD_CACHE.get(key)
    if f is None:
        f = Field(p, k)
        _FIELD_CACHE[key] = f
    return f


def field_arith(field: Field, op: str, a: int, b: int | None = None) -> int:
    return field.arith(op, a, b)
