"""
Verificação de ordens estocásticas e acoplamento monótono
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, NamedTuple, Optional

import numpy as np
from scipy import integrate

import config
from distribution import Distribution, derive_rng
from exceptions import InputValidationError, OrderViolationError

logger = logging.getLogger(__name__)

ST = "st"
WEIGHTED = "weighted"
CONVEX = "convex"
SIGN_SEQUENCE = "sign_sequence"


@dataclass(frozen=True)
class OrderVerdict:
    """Resultado de uma verificação de ordem entre duas leis"""

    holds: bool
    worst_point: float
    margin: float
    checked_grid: str
    order_kind: str
    warning: Optional[str] = None
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "holds": self.holds,
            "worst_point": self.worst_point,
            "margin": self.margin,
            "checked_grid": self.checked_grid,
            "order_kind": self.order_kind,
            "warning": self.warning,
            "details": self.details,
        }


def _merged_grid(x: Distribution, y: Distribution, t_min: Optional[float] = None) -> np.ndarray:
    grid = np.union1d(x.support, y.support)
    if t_min is not None:
        grid = grid[grid >= t_min]
    return grid


def _describe(grid: np.ndarray) -> str:
    if grid.size == 0:
        return "grade vazia"
    return f"{grid.size} pontos em [{grid[0]:.6g}, {grid[-1]:.6g}]"


def _worst(grid: np.ndarray, violation: np.ndarray) -> float:
    """Ponto mais à direita entre os empatados com a maior violação"""
    peak = violation.max()
    candidates = np.flatnonzero(violation >= peak - config.EPS_TIE)
    return float(grid[candidates[-1]])


def _verdict(margin: float, worst_point: float, grid: np.ndarray, kind: str,
             details: Optional[Dict[str, Any]] = None) -> OrderVerdict:
    holds = margin >= -config.EPS_ORDER
    warning = None
    if holds and margin < 0:
        warning = f"violação {-margin:.2e} dentro da tolerância {config.EPS_ORDER:g}"
        logger.warning(f"⚠️ ordem {kind}: {warning} (t={worst_point:.6g})")
    return OrderVerdict(
        holds=bool(holds),
        worst_point=worst_point,
        margin=float(margin),
        checked_grid=_describe(grid),
        order_kind=kind,
        warning=warning,
        details=details or {},
    )


def _survival_gap(smaller: Distribution, larger: Distribution, grid: np.ndarray,
                  a: float = 1.0, b: float = 1.0) -> np.ndarray:
    """a·S_smaller - b·S_larger, pior caso entre S(t) e S(t⁺) em cada ponto"""
    at = a * smaller.survival(grid) - b * larger.survival(grid)
    after = a * smaller.survival_right(grid) - b * larger.survival_right(grid)
    return np.maximum(at, after)


def check_st(x: Distribution, y: Distribution, t_min: Optional[float] = None) -> OrderVerdict:
    """
    Decide X ≤_st Y comparando as funções de sobrevivência na grade combinada

    Args:
        x: Lei supostamente menor
        y: Lei supostamente maior
        t_min: Restringe a verificação a t >= t_min

    Returns:
        OrderVerdict com margem mín(S_y - S_x)
    """
    grid = _merged_grid(x, y, t_min)
    if grid.size == 0:
        return _verdict(0.0, math.nan, grid, ST, {"vacuous": True})
    gap = _survival_gap(x, y, grid)
    return _verdict(-float(gap.max()), _worst(grid, gap), grid, ST)


def check_weighted(y: Distribution, x: Distribution, sigma2: float, k2: float) -> OrderVerdict:
    """
    Decide Y ≤_{σ,k} X: σ² ≤ k² e σ² S_y(t) ≤ k² S_x(t) para todo t

    Toda função crescente e positiva é limite de constantes não negativas
    somadas a misturas de indicadoras 1{(t, ∞)}, daí os dois testes.
    """
    if sigma2 <= 0:
        raise InputValidationError(f"deve ser positivo, recebido {sigma2}", field="sigma2")
    if k2 <= 0:
        raise InputValidationError(f"deve ser positivo, recebido {k2}", field="k2")

    grid = _merged_grid(x, y)
    gap = _survival_gap(y, x, grid, a=sigma2, b=k2)
    # no primeiro ponto S_x = S_y = 1: o teste das constantes já está em gap[0]
    details = {"constant_margin": k2 - sigma2, "sigma2": sigma2, "k2": k2}
    return _verdict(-float(gap.max()), _worst(grid, gap), grid, WEIGHTED, details)


def stop_loss(d: Distribution, t) -> np.ndarray:
    """
    Transformada stop-loss π(t) = E(X - t)₊ = ∫_t^∞ S(u) du

    Exata para a representação em grade: soma de sufixos para leis discretas,
    trapézio sobre a CDF linear por partes para leis contínuas.
    """
    t = np.asarray(t, dtype=float)
    x = d.support
    if not d.is_continuous:
        moment = x * d.weights
        suffix_moment = np.concatenate([np.cumsum(moment[::-1])[::-1], [0.0]])
        suffix_mass = np.concatenate([np.cumsum(d.weights[::-1])[::-1], [0.0]])
        index = np.searchsorted(x, t, side="right")
        return np.maximum(suffix_moment[index] - t * suffix_mass[index], 0.0)

    survival_nodes = 1.0 - d.cdf(x)
    tail = integrate.cumulative_trapezoid(survival_nodes[::-1], -x[::-1], initial=0.0)[::-1]
    index = np.clip(np.searchsorted(x, t, side="right"), 1, x.size - 1)
    upper = x[index]
    partial = 0.5 * (d.survival(t) + survival_nodes[index]) * (upper - t)
    inside = tail[index] + partial
    below = tail[0] + (x[0] - t)
    return np.where(t >= x[-1], 0.0, np.where(t < x[0], below, np.maximum(inside, 0.0)))


def check_convex(x: Distribution, y: Distribution) -> OrderVerdict:
    """
    Decide X ≤_cx Y: médias iguais e π_X(t) ≤ π_Y(t) para todo t

    Args:
        x: Lei supostamente menos dispersa
        y: Lei supostamente mais dispersa
    """
    for name, d in (("x", x), ("y", y)):
        if not math.isfinite(d.mean):
            raise InputValidationError("média infinita", field=name)

    grid = _merged_grid(x, y)
    gap = stop_loss(x, grid) - stop_loss(y, grid)
    mean_gap = abs(x.mean - y.mean)
    stop_loss_margin = -float(gap.max())
    details = {"mean_gap": mean_gap, "stop_loss_margin": stop_loss_margin}
    margin = -mean_gap if mean_gap > config.EPS_ORDER else min(stop_loss_margin, -mean_gap)
    return _verdict(margin, _worst(grid, gap), grid, CONVEX, details)


def _mass_or_density(d: Distribution, grid: np.ndarray) -> np.ndarray:
    if d.is_continuous:
        return d.density(grid)
    index = np.clip(np.searchsorted(d.support, grid), 0, d.support.size - 1)
    hit = np.isclose(d.support[index], grid, rtol=0.0, atol=1e-12)
    return np.where(hit, d.weights[index], 0.0)


def sign_sequence(x: Distribution, y: Distribution) -> OrderVerdict:
    """
    Sequência de sinais de f_x - f_y na grade combinada

    Vale quando o padrão é exatamente "+-+"; a margem é então o menor pico
    entre os três lóbulos, e -1 caso contrário.
    """
    grid = _merged_grid(x, y)
    difference = _mass_or_density(x, grid) - _mass_or_density(y, grid)
    signs = np.where(difference > config.EPS_SIGN, 1, np.where(difference < -config.EPS_SIGN, -1, 0))
    nonzero = np.flatnonzero(signs)

    pattern = ""
    peaks = []
    for position, index in enumerate(nonzero):
        if position == 0 or signs[index] != signs[nonzero[position - 1]]:
            pattern += "+" if signs[index] > 0 else "-"
            peaks.append((0.0, math.nan))
        size = abs(float(difference[index]))
        if size > peaks[-1][0]:
            peaks[-1] = (size, float(grid[index]))

    holds = pattern == "+-+"
    margin = min(size for size, _ in peaks) if holds else -1.0
    worst = min(peaks)[1] if peaks else math.nan
    return OrderVerdict(
        holds=holds,
        worst_point=worst,
        margin=margin,
        checked_grid=_describe(grid),
        order_kind=SIGN_SEQUENCE,
        details={"pattern": pattern, "changes": max(len(pattern) - 1, 0)},
    )


class CouplingSample(NamedTuple):
    """Pares (X, Y) do acoplamento e quantos violam X <= Y + ε"""

    first: np.ndarray
    second: np.ndarray
    violations: int


@dataclass(frozen=True)
class CouplingSampler:
    """
    Acoplamento por quantis: um único U alimenta as duas inversas.
    Cada chamada de draw recria o gerador com derive_rng(seed, 0).
    """

    x: Distribution
    y: Distribution
    seed: int

    def draw(self, n: int) -> CouplingSample:
        if n < 1:
            raise InputValidationError(f"n deve ser >= 1, recebido {n}", field="n")
        rng = derive_rng(self.seed, 0)
        u = rng.random(n)
        first, second = self.x.quantile(u), self.y.quantile(u)
        violations = int(np.count_nonzero(first > second + config.EPS_ORDER))
        return CouplingSample(first=first, second=second, violations=violations)


def quantile_coupling(x: Distribution, y: Distribution, seed: int, n: int) -> CouplingSample:
    """
    Realiza X ≤_st Y como acoplamento quase certo (construção de Strassen)

    Raises:
        OrderViolationError: se check_st(x, y) não vale; carrega o OrderVerdict
    """
    verdict = check_st(x, y)
    if not verdict.holds:
        raise OrderViolationError(
            f"'{x.label}' não é ≤_st '{y.label}' (violação {-verdict.margin:.3e} em t={verdict.worst_point:.6g})",
            verdict=verdict,
        )
    sample = CouplingSampler(x=x, y=y, seed=seed).draw(n)
    if sample.violations:
        logger.warning(f"⚠️ acoplamento com {sample.violations} pares violando X <= Y")
    else:
        logger.debug(f"✅ acoplamento de {n} pares sem violações")
    return sample
