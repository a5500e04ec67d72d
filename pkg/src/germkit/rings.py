"""Exact coefficient rings (Q, Z, Z/n) and the linear algebra used on top of them.

Ring values are plain Python objects: Fraction for Q, int for Z and Z/n
(normalized to 0..n-1).  All arithmetic is exact; there are no tolerances
anywhere in this package.
"""

from fractions import Fraction


class RingError(ValueError):
    pass


class NotAField(RingError):
    pass


class DecomposableRing(RingError):
    pass


def is_prime(n):
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


class Ring:
    """One of Q, Z, or Z/n for n >= 2.  Z/n with composite n is constructible
    so that operations which require indecomposability can reject it."""

    __slots__ = ("kind", "modulus")

    def __init__(self, kind, modulus=None):
        if kind not in ("Q", "Z", "Zmod"):
            raise RingError(f"unknown ring kind {kind!r}")
        if kind == "Zmod" and (modulus is None or modulus < 2):
            raise RingError("modulus must be an integer >= 2")
        if kind != "Zmod":
            modulus = None
        self.kind = kind
        self.modulus = modulus

    def __eq__(self, other):
        return (
            isinstance(other, Ring)
            and self.kind == other.kind
            and self.modulus == other.modulus
        )

    def __hash__(self):
        return hash((self.kind, self.modulus))

    def __repr__(self):
        if self.kind == "Zmod":
            return f"Ring(Z/{self.modulus})"
        return f"Ring({self.kind})"

    @property
    def zero(self):
        return Fraction(0) if self.kind == "Q" else 0

    @property
    def one(self):
        return Fraction(1) if self.kind == "Q" else 1

    def is_field(self):
        if self.kind == "Q":
            return True
        if self.kind == "Zmod":
            return is_prime(self.modulus)
        return False

    def is_indecomposable(self):
        """No idempotents besides 0 and 1.  For Z/n this means n is a prime
        power; Q and Z are always indecomposable."""
        if self.kind != "Zmod":
            return True
        n = self.modulus
        for p in range(2, n + 1):
            if p * p > n:
                return True  # n itself is prime
            if n % p == 0:
                while n % p == 0:
                    n //= p
                return n == 1

    def normalize(self, v):
        if self.kind == "Q":
            return Fraction(v)
        if self.kind == "Z":
            if isinstance(v, Fraction):
                if v.denominator != 1:
                    raise RingError(f"{v} is not an integer")
                v = v.numerator
            return int(v)
        return int(v) % self.modulus

    def add(self, a, b):
        return self.normalize(a + b)

    def sub(self, a, b):
        return self.normalize(a - b)

    def neg(self, a):
        return self.normalize(-a)

    def mul(self, a, b):
        return self.normalize(a * b)

    def inv(self, a):
        a = self.normalize(a)
        if a == self.zero:
            raise RingError("division by zero")
        if self.kind == "Q":
            return Fraction(1) / a
        if self.kind == "Zmod":
            if not self.is_field():
                g = _gcd(a, self.modulus)
                if g != 1:
                    raise RingError(f"{a} is not a unit mod {self.modulus}")
            return pow(a, -1, self.modulus)
        if a in (1, -1):
            return a
        raise RingError(f"{a} is not a unit in Z")

    def parse(self, text):
        """Parse a ring element from its JSON string/int form."""
        if self.kind == "Q":
            return Fraction(str(text))
        return self.normalize(int(text))

    def fmt(self, v):
        if self.kind == "Q":
            f = Fraction(v)
            return str(f.numerator) if f.denominator == 1 else str(f)
        return str(v)


RING_Q = Ring("Q")
RING_Z = Ring("Z")


def ring_zmod(n):
    return Ring("Zmod", n)


def parse_ring_spec(spec):
    """CLI ring flag: 'Q', 'Z', or 'Zp:<n>'."""
    if spec == "Q":
        return RING_Q
    if spec == "Z":
        return RING_Z
    if spec.startswith("Zp:"):
        return ring_zmod(int(spec[3:]))
    raise RingError(f"unknown ring spec {spec!r} (expected Q, Z, or Zp:<p>)")


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


# --- vectors -----------------------------------------------------------------

def vec_zero(ring, n):
    return [ring.zero] * n


def vec_add(ring, u, v):
    return [ring.add(a, b) for a, b in zip(u, v)]


def vec_sub(ring, u, v):
    return [ring.sub(a, b) for a, b in zip(u, v)]


def vec_scale(ring, c, u):
    return [ring.mul(c, a) for a in u]


def vec_is_zero(ring, u):
    z = ring.zero
    return all(a == z for a in u)


# --- row reduction over a field ----------------------------------------------

def rref(ring, rows):
    """Reduced row echelon form with leftmost-pivot order.

    Returns (reduced nonzero rows, pivot column list).  Deterministic: rows
    are processed in the given order, pivots chosen leftmost-first.
    """
    if not ring.is_field():
        raise NotAField(f"row reduction needs a field, got {ring!r}")
    work = [list(r) for r in rows]
    ncols = len(work[0]) if work else 0
    pivots = []
    out = []
    rix = 0
    for col in range(ncols):
        piv = None
        for i in range(rix, len(work)):
            if work[i][col] != ring.zero:
                piv = i
                break
        if piv is None:
            continue
        work[rix], work[piv] = work[piv], work[rix]
        inv = ring.inv(work[rix][col])
        work[rix] = [ring.mul(inv, a) for a in work[rix]]
        for i in range(len(work)):
            if i != rix and work[i][col] != ring.zero:
                c = work[i][col]
                work[i] = [ring.sub(a, ring.mul(c, b)) for a, b in zip(work[i], work[rix])]
        pivots.append(col)
        out.append(work[rix])
        rix += 1
        if rix == len(work):
            break
    return out, pivots


def reduce_vector(ring, vec, rows, pivots):
    """Canonical residue of vec modulo the row space given by rref output."""
    v = list(vec)
    for row, col in zip(rows, pivots):
        c = v[col]
        if c != ring.zero:
            v = [ring.sub(a, ring.mul(c, b)) for a, b in zip(v, row)]
    return v


def solve_in_span(ring, gens, target):
    """Coefficients expressing target in the module span of gens, or None.

    Fields use augmented row reduction; Z uses exact integer elimination.
    """
    gens = [list(g) for g in gens]
    target = list(target)
    if not gens:
        return [] if vec_is_zero(ring, target) else None
    if ring.is_field():
        return _field_solve(ring, gens, target)
    if ring.kind == "Z":
        return _int_solve(gens, target)
    raise NotAField(f"span solving is not supported over {ring!r}")


def _field_solve(ring, gens, target):
    n = len(gens[0])
    m = len(gens)
    # columns = generators; augment with target and eliminate
    rows = [[gens[j][i] for j in range(m)] + [target[i]] for i in range(n)]
    red, pivots = rref(ring, rows)
    coeffs = [ring.zero] * m
    for row, col in zip(red, pivots):
        if col == m:
            return None  # target has a pivot of its own: not in span
        coeffs[col] = row[m]
    return coeffs


def _int_solve(gens, target):
    # forward elimination by gcd steps, tracking coefficients over the gens
    m = len(gens)
    n = len(gens[0])
    rows = [list(g) + [1 if j == i else 0 for j in range(m)] for i, g in enumerate(gens)]
    t = list(target) + [0] * m

    def combine(r, q, s):  # r -= q * s
        return [a - q * b for a, b in zip(r, s)]

    pivot_rows = []
    active = rows
    for col in range(n):
        nz = [r for r in active if r[col] != 0]
        rest = [r for r in active if r[col] == 0]
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            base = nz[0]
            new = [base]
            for r in nz[1:]:
                q = r[col] // base[col]
                r = combine(r, q, base)
                (new if r[col] != 0 else rest).append(r)
            nz = new
            if len(nz) == 1:
                break
            nz = sorted(nz, key=lambda r: abs(r[col]))
        if nz:
            pivot_rows.append((col, nz[0]))
            active = rest
        else:
            active = rest
    for col, row in pivot_rows:
        if t[col] != 0:
            if t[col] % row[col] != 0:
                return None
            t = combine(t, t[col] // row[col], row)
    if any(t[i] != 0 for i in range(n)):
        return None
    return [-t[n + j] for j in range(m)]
