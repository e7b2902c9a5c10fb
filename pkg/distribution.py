"""
Leis de probabilidade univariadas e bivariadas representadas em grade finita
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np
from scipy import integrate

import config
from exceptions import InputValidationError, NumericalPrecisionError

logger = logging.getLogger(__name__)

CONTINUOUS = "continuous"
DISCRETE = "discrete"
KINDS = (CONTINUOUS, DISCRETE)


@dataclass(frozen=True)
class MomentSummary:
    """Momentos em cache de uma Distribution"""

    mean: float
    variance: float
    third_central_moment: float
    mgf_domain_hint: Tuple[float, float]

    def __post_init__(self):
        if self.variance < 0:
            raise NumericalPrecisionError(f"variância negativa: {self.variance}")

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


class TailFunctions(NamedTuple):
    """Par de funções vetorizadas: S(t) = P(X >= t) e F(t) = P(X <= t)"""

    survival: Callable[[np.ndarray], np.ndarray]
    cdf: Callable[[np.ndarray], np.ndarray]


class MgfEvaluation(NamedTuple):
    """Valor de M(λ), de M'(λ) = E[X e^{λX}] e se λ está no domínio confiável"""

    value: float
    derivative: float
    trusted: bool


def _as_grid(values, name: str) -> np.ndarray:
    array = np.array(values, dtype=float).ravel()
    if array.size == 0:
        raise InputValidationError("grade vazia", field=name)
    if not np.all(np.isfinite(array)):
        raise InputValidationError("valores não finitos", field=name)
    return array


def _check_uniform_spacing(support: np.ndarray, name: str) -> float:
    if support.size < 2:
        raise InputValidationError("grade contínua precisa de ao menos 2 nós", field=name)
    steps = np.diff(support)
    h = float(steps.mean())
    scale = max(1.0, float(np.max(np.abs(support))))
    if np.max(np.abs(steps - h)) > 1e-6 * h + 1e-12 * scale:
        raise InputValidationError("espaçamento não uniforme em grade contínua", field=name)
    return h


def _freeze(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class Distribution:
    """
    Lei univariada em grade finita.

    Para kind contínuo, weights são valores de densidade numa grade uniforme e a
    massa é obtida pela regra do trapézio; para kind discreto, weights são
    massas em átomos arbitrários. O construtor normaliza e guarda os momentos.
    """

    kind: str
    support: np.ndarray
    weights: np.ndarray
    label: str = ""
    truncated_left: bool = False
    truncated_right: bool = False
    raw_mass: float = field(init=False, default=1.0)
    moments: MomentSummary = field(init=False, repr=False)
    _cdf_nodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputValidationError(f"tipo desconhecido '{self.kind}'", field="kind")

        support = _as_grid(self.support, "support")
        weights = _as_grid(self.weights, "weights")
        if support.shape != weights.shape:
            raise InputValidationError(
                f"{support.size} pontos de suporte para {weights.size} pesos", field="weights"
            )
        if support.size > 1 and not np.all(np.diff(support) > 0):
            raise InputValidationError("grade de suporte não é estritamente crescente", field="support")
        if np.any(weights < 0):
            index = int(np.argmax(weights < 0))
            raise InputValidationError(
                f"peso negativo {weights[index]} em x={support[index]}", field="weights"
            )

        if self.kind == CONTINUOUS:
            _check_uniform_spacing(support, "support")
            mass = float(integrate.trapezoid(weights, support))
        else:
            mass = float(weights.sum())
        if not np.isfinite(mass) or mass <= 0:
            raise InputValidationError(f"massa total inválida ({mass})", field="weights")

        weights = weights / mass
        if self.kind == CONTINUOUS:
            cdf_nodes = integrate.cumulative_trapezoid(weights, support, initial=0.0)
            cdf_nodes = cdf_nodes / cdf_nodes[-1]
        else:
            cdf_nodes = np.minimum(np.cumsum(weights), 1.0)
            cdf_nodes[-1] = 1.0

        object.__setattr__(self, "support", _freeze(support))
        object.__setattr__(self, "weights", _freeze(weights))
        object.__setattr__(self, "raw_mass", mass)
        object.__setattr__(self, "_cdf_nodes", _freeze(cdf_nodes))

        mean = self._integrate(support)
        centered = support - mean
        variance = max(self._integrate(centered ** 2), 0.0)
        third = self._integrate(centered ** 3)
        if variance <= 0 and not self.is_point_mass:
            raise InputValidationError("variância nula em lei que não é massa pontual", field="weights")
        object.__setattr__(
            self,
            "moments",
            MomentSummary(
                mean=mean,
                variance=variance,
                third_central_moment=third,
                mgf_domain_hint=self._mgf_domain_hint(),
            ),
        )

    # ------------------------------------------------------------------ básicos

    @property
    def is_continuous(self) -> bool:
        return self.kind == CONTINUOUS

    @property
    def is_point_mass(self) -> bool:
        return self.kind == DISCRETE and int(np.count_nonzero(self.weights > 0)) == 1

    @property
    def grid_spacing(self) -> Optional[float]:
        if not self.is_continuous:
            return None
        return float((self.support[-1] - self.support[0]) / (self.support.size - 1))

    @property
    def mean(self) -> float:
        return self.moments.mean

    @property
    def variance(self) -> float:
        return self.moments.variance

    @property
    def std(self) -> float:
        return self.moments.std

    @property
    def hull(self) -> Tuple[float, float]:
        """Extremos do fecho convexo do suporte"""
        if self.is_continuous:
            return float(self.support[0]), float(self.support[-1])
        positive = self.support[self.weights > 0]
        return float(positive[0]), float(positive[-1])

    @property
    def is_truncated(self) -> bool:
        return self.truncated_left or self.truncated_right

    def _integrate(self, values: np.ndarray) -> float:
        if self.is_continuous:
            return float(integrate.trapezoid(values * self.weights, self.support))
        return float(np.sum(values * self.weights))

    def expectation(self, function: Callable[[np.ndarray], np.ndarray]) -> float:
        """E[g(X)] pela mesma quadratura usada na normalização"""
        return self._integrate(np.asarray(function(self.support), dtype=float))

    def _mgf_domain_hint(self) -> Tuple[float, float]:
        budget = math.log(config.MGF_TRUNCATION_TOLERANCE / config.TAIL_QUANTILE)
        low, high = -math.inf, math.inf
        left, right = float(self.support[0]), float(self.support[-1])
        if self.truncated_right and right > 0:
            high = budget / right
        if self.truncated_left and left < 0:
            low = -budget / abs(left)
        return low, high

    # ------------------------------------------------------------ CDF e caudas

    def cdf(self, t) -> np.ndarray:
        """F(t) = P(X <= t); fora do suporte devolve exatamente 0 ou 1"""
        t = np.asarray(t, dtype=float)
        if self.is_continuous:
            return np.interp(t, self.support, self._cdf_nodes, left=0.0, right=1.0)
        index = np.searchsorted(self.support, t, side="right")
        return np.where(index > 0, self._cdf_nodes[np.maximum(index - 1, 0)], 0.0)

    def cdf_left(self, t) -> np.ndarray:
        """F(t⁻) = P(X < t)"""
        if self.is_continuous:
            return self.cdf(t)
        t = np.asarray(t, dtype=float)
        index = np.searchsorted(self.support, t, side="left")
        return np.where(index > 0, self._cdf_nodes[np.maximum(index - 1, 0)], 0.0)

    def survival(self, t) -> np.ndarray:
        """S(t) = P(X >= t)"""
        return 1.0 - self.cdf_left(t)

    def survival_right(self, t) -> np.ndarray:
        """S(t⁺) = P(X > t)"""
        return 1.0 - self.cdf(t)

    def quantile(self, u) -> np.ndarray:
        """
        Inversa generalizada de F.

        Discreto: primeiro átomo com F > u, nunca um átomo de massa nula.
        Contínuo: inversa da CDF linear por partes entre os nós.
        """
        u = np.asarray(u, dtype=float)
        nodes = self._cdf_nodes
        index = np.searchsorted(nodes, u, side="right")
        if not self.is_continuous:
            return self.support[np.minimum(index, self.support.size - 1)]

        index = np.clip(index, 1, self.support.size - 1)
        lower, upper = nodes[index - 1], nodes[index]
        width = upper - lower
        fraction = np.divide(u - lower, width, out=np.zeros_like(u), where=width > 0)
        fraction = np.clip(fraction, 0.0, 1.0)
        h = self.grid_spacing
        return self.support[index - 1] + fraction * h

    def density(self, t) -> np.ndarray:
        """Densidade interpolada (log-linear onde positiva), zero fora do suporte"""
        if not self.is_continuous:
            raise InputValidationError("densidade só existe para leis contínuas", field="kind")
        t = np.asarray(t, dtype=float)
        x, f = self.support, self.weights
        h = self.grid_spacing
        index = np.clip(np.searchsorted(x, t, side="right") - 1, 0, x.size - 2)
        w = np.clip((t - x[index]) / h, 0.0, 1.0)
        f0, f1 = f[index], f[index + 1]
        both_positive = (f0 > 0) & (f1 > 0)
        with np.errstate(divide="ignore"):
            log_interp = np.exp((1 - w) * np.log(np.where(both_positive, f0, 1.0))
                                + w * np.log(np.where(both_positive, f1, 1.0)))
        values = np.where(both_positive, log_interp, (1 - w) * f0 + w * f1)
        inside = (t >= x[0]) & (t <= x[-1])
        return np.where(inside, values, 0.0)

    def mgf(self, lam: float) -> float:
        return mgf_eval(self, lam).value

    # ------------------------------------------------------- operações afins

    def _derived(self, support, weights, label, truncated_left=None, truncated_right=None):
        return Distribution(
            kind=self.kind,
            support=support,
            weights=weights,
            label=label,
            truncated_left=self.truncated_left if truncated_left is None else truncated_left,
            truncated_right=self.truncated_right if truncated_right is None else truncated_right,
        )

    def shift(self, c: float) -> "Distribution":
        """Lei de X + c"""
        return self._derived(self.support + c, self.weights, f"{self.label}+{c:g}")

    def scale(self, a: float) -> "Distribution":
        """Lei de a·X; a < 0 reflete a grade"""
        if a == 0:
            raise InputValidationError("fator de escala nulo", field="scale")
        weights = self.weights / abs(a) if self.is_continuous else self.weights
        if a > 0:
            return self._derived(self.support * a, weights, f"{a:g}*{self.label}")
        return self._derived(
            (self.support * a)[::-1],
            weights[::-1],
            f"{a:g}*{self.label}",
            truncated_left=self.truncated_right,
            truncated_right=self.truncated_left,
        )

    def reflect(self) -> "Distribution":
        """Lei de -X"""
        return self.scale(-1.0)

    def center(self) -> "Distribution":
        """Lei de X - E[X]"""
        return self.shift(-self.mean)

    def with_label(self, label: str) -> "Distribution":
        return self._derived(self.support, self.weights, label)


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Lei bivariada numa grade produto; linhas indexam x, colunas indexam y"""

    kind: str
    support_x: np.ndarray
    support_y: np.ndarray
    weights: np.ndarray
    label: str = ""
    marginal_x: Distribution = field(init=False, repr=False)
    marginal_y: Distribution = field(init=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputValidationError(f"tipo desconhecido '{self.kind}'", field="kind")
        support_x = _as_grid(self.support_x, "support_x")
        support_y = _as_grid(self.support_y, "support_y")
        weights = np.array(self.weights, dtype=float)
        if weights.shape != (support_x.size, support_y.size):
            raise InputValidationError(
                f"matriz {weights.shape} incompatível com grades ({support_x.size}, {support_y.size})",
                field="weights",
            )
        if not np.all(np.isfinite(weights)):
            raise InputValidationError("valores não finitos", field="weights")
        if np.any(weights < 0):
            raise InputValidationError("peso conjunto negativo", field="weights")
        for name, grid in (("support_x", support_x), ("support_y", support_y)):
            if grid.size > 1 and not np.all(np.diff(grid) > 0):
                raise InputValidationError("grade não é estritamente crescente", field=name)
            if self.kind == CONTINUOUS:
                _check_uniform_spacing(grid, name)

        row_mass = self._collapse(weights, support_y, axis=1)
        mass = self._collapse(row_mass, support_x, axis=0)
        if not np.isfinite(mass) or mass <= 0:
            raise InputValidationError(f"massa total inválida ({mass})", field="weights")
        weights = weights / mass

        object.__setattr__(self, "support_x", _freeze(support_x))
        object.__setattr__(self, "support_y", _freeze(support_y))
        object.__setattr__(self, "weights", _freeze(weights))
        object.__setattr__(
            self,
            "marginal_x",
            Distribution(self.kind, support_x, self._collapse(weights, support_y, axis=1), f"{self.label}[x]"),
        )
        object.__setattr__(
            self,
            "marginal_y",
            Distribution(self.kind, support_y, self._collapse(weights, support_x, axis=0), f"{self.label}[y]"),
        )

    def _collapse(self, values: np.ndarray, grid: np.ndarray, axis: int):
        if self.kind == CONTINUOUS:
            return integrate.trapezoid(values, grid, axis=axis)
        return values.sum(axis=axis)

    def marginal(self, axis: int) -> Distribution:
        return self.marginal_x if axis == 0 else self.marginal_y

    def marginal_defect(self) -> float:
        """Maior diferença entre as marginais recalculadas e as em cache"""
        recomputed_x = self._collapse(self.weights, self.support_y, axis=1)
        recomputed_y = self._collapse(self.weights, self.support_x, axis=0)
        return float(max(
            np.max(np.abs(recomputed_x - self.marginal_x.weights)),
            np.max(np.abs(recomputed_y - self.marginal_y.weights)),
        ))

    def scale_axis(self, axis: int, factor: float) -> "JointDistribution":
        """Lei de (a·X, Y) ou (X, a·Y) com a > 0"""
        if factor <= 0:
            raise InputValidationError("fator deve ser positivo", field="factor")
        weights = self.weights / factor if self.kind == CONTINUOUS else self.weights
        if axis == 0:
            return JointDistribution(self.kind, self.support_x * factor, self.support_y, weights, self.label)
        return JointDistribution(self.kind, self.support_x, self.support_y * factor, weights, self.label)

    @classmethod
    def product(cls, first: Distribution, second: Distribution) -> "JointDistribution":
        """Lei conjunta de marginais independentes"""
        if first.kind != second.kind:
            raise InputValidationError("marginais de tipos diferentes", field="kind")
        return cls(
            kind=first.kind,
            support_x=first.support,
            support_y=second.support,
            weights=np.outer(first.weights, second.weights),
            label=f"{first.label}⊗{second.label}",
        )


def tail_function(d: Distribution) -> TailFunctions:
    """Funções de sobrevivência e distribuição da lei"""
    return TailFunctions(survival=d.survival, cdf=d.cdf)


def mgf_eval(d: Distribution, lam: float) -> MgfEvaluation:
    """
    Avalia M(λ) = E[e^{λX}] e M'(λ) por quadratura na grade

    Args:
        d: Lei avaliada
        lam: Argumento λ

    Returns:
        MgfEvaluation com o indicador de precisão degradada
    """
    low, high = d.moments.mgf_domain_hint
    trusted = low <= lam <= high
    if not trusted:
        logger.warning(f"⚠️ λ={lam:g} fora do domínio confiável [{low:g}, {high:g}] para '{d.label}'")
    with np.errstate(over="raise"):
        try:
            exponential = np.exp(lam * d.support)
        except FloatingPointError as e:
            raise NumericalPrecisionError(f"overflow em e^(λx) com λ={lam}") from e
    value = d._integrate(exponential)
    derivative = d._integrate(d.support * exponential)
    return MgfEvaluation(value=value, derivative=derivative, trusted=trusted)


def derive_rng(root_seed: int, index: int) -> np.random.Generator:
    """Gerador da tarefa `index` derivado deterministicamente da semente raiz"""
    if root_seed < 0 or index < 0:
        raise InputValidationError("sementes devem ser inteiros não negativos", field="seed")
    return np.random.default_rng(np.random.SeedSequence([int(root_seed), int(index)]))


def sample(d: Distribution, seed: int, n: int) -> np.ndarray:
    """Amostragem pela inversa da CDF; determinística para semente fixa"""
    if n < 1:
        raise InputValidationError(f"n deve ser >= 1, recebido {n}", field="n")
    rng = derive_rng(seed, 0)
    return d.quantile(rng.random(n))


def kolmogorov_distance(a: Distribution, b: Distribution) -> float:
    """sup |F_a - F_b| na grade combinada, incluindo limites à esquerda"""
    merged = np.union1d(a.support, b.support)
    right = np.max(np.abs(a.cdf(merged) - b.cdf(merged)))
    left = np.max(np.abs(a.cdf_left(merged) - b.cdf_left(merged)))
    return float(max(right, left))


def convolve(a: Distribution, b: Distribution) -> Distribution:
    """Lei de X + Y para X, Y discretas e independentes"""
    if a.is_continuous or b.is_continuous:
        raise InputValidationError("convolução implementada apenas para leis discretas", field="kind")
    atoms = np.add.outer(a.support, b.support).ravel()
    masses = np.outer(a.weights, b.weights).ravel()
    keep = masses > 0
    atoms, masses = atoms[keep], masses[keep]
    unique, inverse = np.unique(np.round(atoms, 12), return_inverse=True)
    return Distribution(
        kind=DISCRETE,
        support=unique,
        weights=np.bincount(inverse, weights=masses),
        label=f"{a.label}*{b.label}",
    )
