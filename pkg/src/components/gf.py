"""
Arithmétique exacte dans GF(p^k), juste ce qu'il faut pour la construction
de Singer.

Les éléments sont des polynômes de degré < k à coefficients dans Z_p,
stockés en petit-boutiste (coeffs[0] est le terme constant). Un élément est
aussi repéré par son indice entier sum(c_i * p^i), qui fixe l'ordre de
parcours déterministe utilisé pour le module et l'élément primitif.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Dict, Iterator, List, Tuple

import numpy as np

from .exceptions import FieldError, SingerVerificationError

logger = logging.getLogger(__name__)

DEFAULT_SIZE_LIMIT = 4096


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def prime_factors(n: int) -> List[int]:
    factors = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            factors.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        factors.append(n)
    return factors


def prime_power(q: int) -> Tuple[int, int]:
    """
    Décompose q = p^k.

    Raises:
        FieldError: si q n'est pas une puissance de premier
    """
    if q < 2:
        raise FieldError(f"{q} n'est pas une puissance de nombre premier")
    factors = prime_factors(q)
    if len(factors) != 1:
        raise FieldError(f"{q} n'est pas une puissance de nombre premier")
    p = factors[0]
    k = 0
    while q > 1:
        q //= p
        k += 1
    return p, k


def is_prime_power(q: int) -> bool:
    try:
        prime_power(q)
    except FieldError:
        return False
    return True


def _trim(poly: List[int]) -> List[int]:
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    return poly


def _poly_mod(num: List[int], den: List[int], p: int) -> List[int]:
    """Reste de num par den (den unitaire), coefficients petit-boutistes."""
    rem = [c % p for c in num]
    deg = len(den) - 1
    for shift in range(len(rem) - 1 - deg, -1, -1):
        lead = rem[shift + deg]
        if lead:
            for idx, c in enumerate(den):
                rem[shift + idx] = (rem[shift + idx] - lead * c) % p
    return _trim(rem[:deg] if deg > 0 else [0])


def _monic_polys(p: int, degree: int) -> Iterator[List[int]]:
    """Polynômes unitaires de degré donné, ordre lexicographique gros-boutiste."""
    for body in product(range(p), repeat=degree):
        yield list(reversed(body)) + [1]


def is_irreducible(poly: List[int], p: int) -> bool:
    """Test par division d'essai par tous les unitaires de degré <= deg/2."""
    deg = len(poly) - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for divisor in _monic_polys(p, d):
            if _poly_mod(poly, divisor, p) == [0]:
                return False
    return True


@dataclass(frozen=True)
class FieldElement:
    coeffs: Tuple[int, ...]

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __str__(self) -> str:
        terms = []
        for power, c in enumerate(self.coeffs):
            if not c:
                continue
            if power == 0:
                terms.append(str(c))
            else:
                base = "x" if power == 1 else f"x^{power}"
                terms.append(base if c == 1 else f"{c}{base}")
        return "+".join(reversed(terms)) or "0"


@dataclass(frozen=True)
class FiniteField:
    """
    Corps GF(p^k) défini par un module unitaire irréductible de degré k.

    L'irréductibilité est vérifiée à la construction.
    """

    p: int
    k: int
    modulus_poly: Tuple[int, ...]
    _modulus: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not is_prime(self.p):
            raise FieldError(f"p = {self.p} n'est pas premier")
        if self.k < 1:
            raise FieldError(f"k = {self.k} doit être >= 1")
        poly = [c % self.p for c in self.modulus_poly]
        if len(poly) != self.k + 1 or poly[-1] != 1:
            raise FieldError("le module doit être unitaire de degré k")
        if not is_irreducible(poly, self.p):
            raise FieldError(f"module {self.modulus_poly} réductible sur Z_{self.p}")
        object.__setattr__(self, "modulus_poly", tuple(poly))
        object.__setattr__(self, "_modulus", np.array(poly, dtype=np.int64))

    @property
    def size(self) -> int:
        return self.p ** self.k

    @property
    def zero(self) -> FieldElement:
        return FieldElement((0,) * self.k)

    @property
    def one(self) -> FieldElement:
        return FieldElement((1,) + (0,) * (self.k - 1))

    def element(self, coeffs) -> FieldElement:
        values = [int(c) % self.p for c in coeffs]
        if len(values) > self.k:
            raise FieldError(f"degré {len(values) - 1} >= k = {self.k}")
        return FieldElement(tuple(values + [0] * (self.k - len(values))))

    def from_index(self, index: int) -> FieldElement:
        coeffs = []
        for _ in range(self.k):
            index, c = divmod(index, self.p)
            coeffs.append(c)
        return FieldElement(tuple(coeffs))

    def to_index(self, a: FieldElement) -> int:
        return sum(c * self.p ** power for power, c in enumerate(a.coeffs))

    def elements(self) -> Iterator[FieldElement]:
        for index in range(self.size):
            yield self.from_index(index)

    def add(self, a: FieldElement, b: FieldElement) -> FieldElement:
        return FieldElement(tuple((x + y) % self.p for x, y in zip(a.coeffs, b.coeffs)))

    def neg(self, a: FieldElement) -> FieldElement:
        return FieldElement(tuple((-x) % self.p for x in a.coeffs))

    def sub(self, a: FieldElement, b: FieldElement) -> FieldElement:
        return self.add(a, self.neg(b))

    def scale(self, c: int, a: FieldElement) -> FieldElement:
        return FieldElement(tuple((c * x) % self.p for x in a.coeffs))

    def mul(self, a: FieldElement, b: FieldElement) -> FieldElement:
        product_poly = np.convolve(np.array(a.coeffs, dtype=np.int64), np.array(b.coeffs, dtype=np.int64)) % self.p
        reduced = _poly_mod(product_poly.tolist(), list(self.modulus_poly), self.p)
        return self.element(reduced)

    def pow(self, a: FieldElement, e: int) -> FieldElement:
        if e < 0:
            return self.pow(self.inverse(a), -e)
        result = self.one
        base = a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def order(self, a: FieldElement) -> int:
        """Plus petit e >= 1 tel que a^e = 1 ; e divise p^k - 1."""
        if a.is_zero():
            raise FieldError("l'ordre de 0 n'est pas défini")
        group = self.size - 1
        for d in range(1, group + 1):
            if group % d == 0 and self.pow(a, d) == self.one:
                return d
        raise FieldError(f"aucun ordre trouvé pour {a}")  # pragma: no cover

    def inverse(self, a: FieldElement) -> FieldElement:
        if a.is_zero():
            raise FieldError("0 n'a pas d'inverse")
        return self.pow(a, self.size - 2)

    def is_primitive(self, a: FieldElement) -> bool:
        if a.is_zero():
            return False
        group = self.size - 1
        return all(self.pow(a, group // r) != self.one for r in prime_factors(group)) if group > 1 else a == self.one

    def __str__(self) -> str:
        modulus = FieldElement(self.modulus_poly)
        return f"GF({self.p}^{self.k}) mod {modulus}"


def field_new(p: int, k: int, limit: int = DEFAULT_SIZE_LIMIT) -> FiniteField:
    """
    Construit GF(p^k) avec le plus petit module unitaire irréductible.

    Les candidats sont parcourus dans l'ordre lexicographique de leurs
    coefficients, du degré k vers le terme constant.

    Args:
        p: Caractéristique (premier)
        k: Degré de l'extension
        limit: Taille maximale autorisée de p^k

    Raises:
        FieldError: p non premier ou taille hors limite
    """
    if not is_prime(p):
        raise FieldError(f"p = {p} n'est pas premier")
    if k < 1:
        raise FieldError(f"k = {k} doit être >= 1")
    if p ** k > limit:
        raise FieldError(f"GF({p}^{k}) dépasse la limite de {limit} éléments")
    return _cached_field(p, k)


@lru_cache(maxsize=None)
def _cached_field(p: int, k: int) -> FiniteField:
    for candidate in _monic_polys(p, k):
        if is_irreducible(candidate, p):
            f = FiniteField(p, k, tuple(candidate))
            logger.debug("Corps construit: %s", f)
            return f
    raise FieldError(f"aucun polynôme irréductible de degré {k} sur Z_{p}")  # pragma: no cover


def primitive_element(f: FiniteField) -> FieldElement:
    """
    Premier élément d'ordre p^k - 1 dans l'ordre des indices.

    L'indice lit les coefficients en base p, degré le plus haut en poids
    fort : c'est l'ordre lexicographique du vecteur de coefficients écrit
    du degré k - 1 vers le terme constant, comme pour le choix du module.
    """
    for index in range(1, f.size):
        a = f.from_index(index)
        if f.is_primitive(a):
            return a
    raise FieldError(f"aucun élément primitif dans {f}")  # pragma: no cover


def difference_counts(residues, modulus: int) -> np.ndarray:
    """Nombre de représentations de chaque résidu comme différence (d_i - d_j) mod v."""
    values = np.asarray(sorted(residues), dtype=np.int64)
    diffs = (values[:, None] - values[None, :]) % modulus
    off_diagonal = ~np.eye(len(values), dtype=bool)
    return np.bincount(diffs[off_diagonal], minlength=modulus)


def is_perfect_difference_set(residues, modulus: int) -> bool:
    counts = difference_counts(residues, modulus)
    return counts[0] == 0 and bool(np.all(counts[1:] == 1))


def canonical_rotation(residues, modulus: int) -> Tuple[int, ...]:
    """Plus petite translation (ordre lexicographique) contenant 0."""
    values = sorted(residues)
    rotations = [tuple(sorted((r - base) % modulus for r in values)) for base in values]
    return min(rotations)


@dataclass(frozen=True)
class SingerSet:
    q: int
    modulus: int
    residues: Tuple[int, ...]


def singer_difference_set(q: int, limit: int = DEFAULT_SIZE_LIMIT) -> SingerSet:
    """
    Ensemble de différences parfait de Singer pour q puissance de premier.

    GF(q^3) est réalisé comme GF(p^{3k}). Avec theta primitif et
    v = q^2 + q + 1, on garde les i < v tels que theta^i appartient au
    GF(q)-sous-espace engendré par {1, theta}. Le résultat est vérifié
    exhaustivement avant d'être retourné.

    Args:
        q: Puissance de premier
        limit: Taille maximale de GF(q^3)

    Returns:
        SingerSet dont les résidus sont la rotation canonique contenant 0

    Raises:
        FieldError: q invalide ou GF(q^3) hors limite
        SingerVerificationError: l'ensemble calculé n'est pas parfait
    """
    p, k = prime_power(q)
    if q ** 3 > limit:
        raise FieldError(f"GF({q}^3) = {q ** 3} éléments dépasse la limite {limit}")
    big = field_new(p, 3 * k, limit)
    theta = primitive_element(big)
    modulus = q * q + q + 1

    # sous-corps GF(q) : 0 et les puissances de theta^v (ordre q - 1)
    generator = big.pow(theta, modulus)
    subfield = [big.zero]
    current = big.one
    for _ in range(q - 1):
        subfield.append(current)
        current = big.mul(current, generator)
    for s in subfield:
        if big.pow(s, q) != s:
            raise SingerVerificationError(f"{s} n'est pas fixé par a -> a^{q}")

    span = {big.add(s0, big.mul(s1, theta)) for s0 in subfield for s1 in subfield}
    residues = []
    power = big.one
    for i in range(modulus):
        if power in span:
            residues.append(i)
        power = big.mul(power, theta)

    if len(residues) != q + 1:
        raise SingerVerificationError(f"{len(residues)} résidus trouvés au lieu de {q + 1}")
    if not is_perfect_difference_set(residues, modulus):
        raise SingerVerificationError(f"ensemble {residues} non parfait modulo {modulus}")
    result = SingerSet(q, modulus, canonical_rotation(residues, modulus))
    logger.info("Ensemble de Singer q=%s: %s mod %s", q, result.residues, modulus)
    return result


def field_summary(f: FiniteField) -> Dict[str, object]:
    return {
        "p": f.p,
        "k": f.k,
        "size": f.size,
        "modulus": list(f.modulus_poly),
        "primitive": list(primitive_element(f).coeffs),
    }
