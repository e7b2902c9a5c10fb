"""
Transformadas de Stein: zero-bias, size-bias e zero-bias direcional
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Tuple

import numpy as np
from scipy import integrate

import config
from distribution import CONTINUOUS, Distribution, JointDistribution
from exceptions import InputValidationError

logger = logging.getLogger(__name__)

ZERO_BIAS = "zero_bias"
SIZE_BIAS = "size_bias"
DIRECTIONAL = "directional"

DIRECTIONS = {"first": 0, "second": 1}


@dataclass(frozen=True)
class TransformResult:
    """Lei transformada com o diagnóstico da quadratura"""

    output: Distribution
    input_ref: str
    kind: str
    mass_defect: float
    hull: Tuple[float, float]
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.warnings


def _require_centered(d: Distribution, name: str = "mean") -> None:
    if abs(d.mean) > config.EPS_CENTERED:
        raise InputValidationError(
            f"lei não centrada: média {d.mean:.3e} (centralize antes)", field=name
        )
    if d.variance <= 0:
        raise InputValidationError("variância nula", field="variance")


def _lattice_hull_grid(atoms: np.ndarray, points: int) -> Tuple[np.ndarray, bool]:
    """Grade uniforme no fecho dos átomos; em reticulado, todo átomo vira nó"""
    a, b = float(atoms[0]), float(atoms[-1])
    gaps = np.diff(atoms)
    step = float(gaps.min())
    ratios = gaps / step
    if np.all(np.abs(ratios - np.round(ratios)) < 1e-9):
        cells = int(round((b - a) / step))
        per_cell = max(1, math.ceil((points - 1) / cells))
        return np.linspace(a, b, cells * per_cell + 1), True
    return np.linspace(a, b, points), False


def _zero_bias_continuous(d: Distribution) -> np.ndarray:
    x, f = d.support, d.weights
    h = d.grid_spacing
    g = x * f
    from_left = integrate.cumulative_simpson(g, dx=h, initial=0.0)
    from_right = integrate.cumulative_simpson(g[::-1], dx=h, initial=0.0)[::-1]
    # E[X 1{X>t}] pela cauda direita para t > 0 e -E[X 1{X<=t}] pela esquerda
    density = np.where(x > 0, from_right, -from_left) / d.variance
    return np.maximum(density, 0.0)


def _zero_bias_discrete(d: Distribution, points: int) -> Tuple[np.ndarray, np.ndarray, bool]:
    positive = d.weights > 0
    atoms, masses = d.support[positive], d.weights[positive]
    grid, on_lattice = _lattice_hull_grid(atoms, points)
    h = grid[1] - grid[0]

    moment = atoms * masses
    prefix = np.concatenate([[0.0], np.cumsum(moment)])
    suffix = np.concatenate([np.cumsum(moment[::-1])[::-1], [0.0]])

    count_le = np.searchsorted(atoms, grid, side="right")
    jump_weight = np.zeros_like(grid)
    atom_at_node = np.full(grid.size, -1)
    nearest = np.clip(np.rint((atoms - grid[0]) / h).astype(int), 0, grid.size - 1)
    aligned = np.abs(grid[nearest] - atoms) <= 1e-6 * h
    for i in np.flatnonzero(aligned):
        node = nearest[i]
        count_le[node] = i + 1
        atom_at_node[node] = i
        if i == 0:
            jump_weight[node] = 0.0
        elif i == atoms.size - 1:
            jump_weight[node] = 1.0
        else:
            jump_weight[node] = 0.5

    right_limit = np.where(grid > 0, suffix[count_le], -prefix[count_le])
    jumps = np.where(atom_at_node >= 0, moment[np.maximum(atom_at_node, 0)], 0.0)
    density = (right_limit + jump_weight * jumps) / d.variance
    return grid, np.maximum(density, 0.0), on_lattice


def zero_bias_cdf_formula(d: Distribution, grid: np.ndarray) -> np.ndarray:
    """P(X* <= x) = E[X (X - x) 1{X <= x}] / σ², avaliada nos nós da grade"""
    if d.is_continuous:
        x, f = d.support, d.weights
        h = d.grid_spacing
        second = integrate.cumulative_simpson(x * x * f, dx=h, initial=0.0)
        first = integrate.cumulative_simpson(x * f, dx=h, initial=0.0)
        at_nodes = (second - x * first) / d.variance
        return np.interp(grid, x, at_nodes, left=0.0, right=1.0)
    atoms, masses = d.support, d.weights
    index = np.searchsorted(atoms, grid, side="right")
    second = np.concatenate([[0.0], np.cumsum(atoms * atoms * masses)])
    first = np.concatenate([[0.0], np.cumsum(atoms * masses)])
    return (second[index] - grid * first[index]) / d.variance


def _shape_diagnostics(support: np.ndarray, density: np.ndarray) -> Dict[str, float]:
    left = density[support <= 0]
    right = density[support >= 0]
    rising = float(max(0.0, -np.min(np.diff(left)))) if left.size > 1 else 0.0
    falling = float(max(0.0, np.max(np.diff(right)))) if right.size > 1 else 0.0
    return {"unimodality_violation": max(rising, falling)}


def zero_bias(d: Distribution) -> TransformResult:
    """
    Transformada zero-bias X* de uma lei centrada

    A densidade f*(t) = E[X 1{X>t}] / σ² é sempre contínua, mesmo para
    entrada discreta, e vive no fecho convexo do suporte de d.

    Args:
        d: Lei centrada com variância positiva

    Returns:
        TransformResult com a lei de X*
    """
    _require_centered(d)
    warnings: List[str] = []
    if d.is_continuous:
        grid = d.support
        density = _zero_bias_continuous(d)
        on_lattice = True
    else:
        grid, density, on_lattice = _zero_bias_discrete(d, config.DEFAULT_GRID_POINTS)
        if not on_lattice:
            warnings.append("átomos fora de reticulado: saltos da densidade entre nós")

    mass = float(integrate.trapezoid(density, grid))
    defect = abs(mass - 1.0)
    if defect > config.EPS_TRANSFORM_DEFECT:
        warnings.append(f"defeito de massa {defect:.2e} acima de {config.EPS_TRANSFORM_DEFECT:g}")

    integrated = integrate.cumulative_trapezoid(density, grid, initial=0.0)
    cdf_error = float(np.max(np.abs(integrated - zero_bias_cdf_formula(d, grid))))
    if cdf_error > config.EPS_CDF_CHECK:
        warnings.append(f"CDF pela fórmula fechada difere em {cdf_error:.2e}")

    output = Distribution(
        kind=CONTINUOUS,
        support=grid,
        weights=density,
        label=f"zero_bias({d.label})",
        truncated_left=d.truncated_left,
        truncated_right=d.truncated_right,
    )
    diagnostics = {
        "cdf_check_error": cdf_error,
        "lattice_grid": on_lattice,
        "symmetry_error": float(np.max(np.abs(density - density[::-1]))) if np.allclose(grid, -grid[::-1]) else None,
        "expected_mean": d.moments.third_central_moment / (2 * d.variance),
        **_shape_diagnostics(grid, output.weights),
    }
    for message in warnings:
        logger.warning(f"⚠️ zero-bias de '{d.label}': {message}")
    return TransformResult(
        output=output,
        input_ref=d.label,
        kind=ZERO_BIAS,
        mass_defect=defect,
        hull=d.hull,
        diagnostics=diagnostics,
        warnings=warnings,
    )


def size_bias(d: Distribution) -> TransformResult:
    """
    Transformada size-bias X^s com pesos x f(x) / μ na mesma grade

    Args:
        d: Lei com suporte não negativo e média positiva

    Returns:
        TransformResult do mesmo tipo (discreto continua discreto)
    """
    negative = (d.support < 0) & (d.weights > 0)
    if np.any(negative):
        x = d.support[np.argmax(negative)]
        raise InputValidationError(f"massa positiva em suporte negativo (x={x:g})", field="support")
    mu = d.mean
    if mu <= 0:
        raise InputValidationError(f"média deve ser positiva, recebido {mu:g}", field="mean")

    weights = np.maximum(d.support * d.weights / mu, 0.0)
    if d.is_continuous:
        mass = float(integrate.trapezoid(weights, d.support))
    else:
        mass = float(weights.sum())
    defect = abs(mass - 1.0)
    warnings: List[str] = []
    if defect > config.EPS_TRANSFORM_DEFECT:
        warnings.append(f"defeito de massa {defect:.2e}")
        logger.warning(f"⚠️ size-bias de '{d.label}': defeito de massa {defect:.2e}")

    output = Distribution(
        kind=d.kind,
        support=d.support,
        weights=weights,
        label=f"size_bias({d.label})",
        truncated_left=d.truncated_left,
        truncated_right=d.truncated_right,
    )
    below = d.support <= mu
    crossing = bool(
        np.all(output.weights[below] <= d.weights[below] + config.EPS_MASS)
        and np.all(output.weights[~below] >= d.weights[~below] - config.EPS_MASS)
    )
    diagnostics = {
        "expected_mean": d.expectation(np.square) / mu,
        "density_crossing_at_mean": crossing,
    }
    return TransformResult(
        output=output,
        input_ref=d.label,
        kind=SIZE_BIAS,
        mass_defect=defect,
        hull=d.hull,
        diagnostics=diagnostics,
        warnings=warnings,
    )


def directional_zero_bias(joint: JointDistribution, direction: str) -> TransformResult:
    """
    Marginal na coordenada j da zero-bias direcional na direção i

    A densidade de saída é ∫ (x_i²/σ_i²) f_ij(x_i, y) dx_i.

    Args:
        joint: Lei bivariada
        direction: 'first' (i = x, saída em y) ou 'second' (i = y, saída em x)
    """
    if direction not in DIRECTIONS:
        raise InputValidationError(f"direção desconhecida '{direction}'", field="direction")
    axis = DIRECTIONS[direction]
    marginal = joint.marginal(axis)
    _require_centered(marginal, name=f"marginal_{direction}")

    if axis == 0:
        biasing, other = joint.support_x, joint.support_y
        integrand = (biasing ** 2 / marginal.variance)[:, None] * joint.weights
    else:
        biasing, other = joint.support_y, joint.support_x
        integrand = joint.weights * (biasing ** 2 / marginal.variance)[None, :]
    density = joint._collapse(integrand, biasing, axis=axis)

    if joint.kind == CONTINUOUS:
        mass = float(integrate.trapezoid(density, other))
    else:
        mass = float(density.sum())
    defect = abs(mass - 1.0)
    warnings: List[str] = []
    if defect > config.EPS_TRANSFORM_DEFECT:
        warnings.append(f"defeito de massa {defect:.2e}")
        logger.warning(f"⚠️ zero-bias direcional: defeito de massa {defect:.2e}")
    marginal_defect = joint.marginal_defect()
    if marginal_defect > config.EPS_MARGINAL:
        warnings.append(f"marginais inconsistentes ({marginal_defect:.2e})")
        logger.warning(f"⚠️ zero-bias direcional: marginais divergem em {marginal_defect:.2e}")

    output = Distribution(kind=joint.kind, support=other, weights=density,
                          label=f"directional_{direction}({joint.label})")
    return TransformResult(
        output=output,
        input_ref=joint.label,
        kind=DIRECTIONAL,
        mass_defect=defect,
        hull=output.hull,
        diagnostics={"direction": direction, "direction_variance": marginal.variance,
                     "marginal_defect": marginal_defect},
        warnings=warnings,
    )


def stein_identity_gap(d: Distribution, function: Callable, derivative: Callable,
                       transformed: TransformResult = None) -> float:
    """|E[X f(X)] - σ² E[f'(X*)]| para uma função teste f"""
    if transformed is None:
        transformed = zero_bias(d)
    lhs = d.expectation(lambda x: x * function(x))
    rhs = d.variance * transformed.output.expectation(derivative)
    return abs(lhs - rhs)


def size_bias_identity_gap(d: Distribution, function: Callable,
                           transformed: TransformResult = None) -> float:
    """|E[X f(X)] - μ E[f(X^s)]|"""
    if transformed is None:
        transformed = size_bias(d)
    lhs = d.expectation(lambda x: x * function(x))
    return abs(lhs - d.mean * transformed.output.expectation(function))


def poisson_identity_gap(d: Distribution, lam: float, function: Callable) -> float:
    """|E[X f(X)] - λ E[f(X+1)]|; nula exatamente para a Poisson(λ)"""
    lhs = d.expectation(lambda x: x * function(x))
    return abs(lhs - lam * d.expectation(lambda x: function(x + 1)))


# funções teste (f, f') da bateria de identidade de Stein
STEIN_TEST_BATTERY: Dict[str, Tuple[Callable, Callable]] = {
    "x": (lambda x: x, lambda x: np.ones_like(x)),
    "x2": (lambda x: x ** 2, lambda x: 2 * x),
    "sin": (np.sin, np.cos),
    # saturação suave: um corte em min(x, 1) poria o salto de f' entre nós da grade
    "exp_clipped": (lambda x: np.exp(np.tanh(x)), lambda x: np.exp(np.tanh(x)) / np.cosh(x) ** 2),
}


def stein_identity_battery(d: Distribution, transformed: TransformResult = None) -> Dict[str, float]:
    """Lacuna da identidade de Stein para cada função de config.STEIN_TEST_FUNCTIONS"""
    if transformed is None:
        transformed = zero_bias(d)
    return {
        name: stein_identity_gap(d, *STEIN_TEST_BATTERY[name], transformed=transformed)
        for name in config.STEIN_TEST_FUNCTIONS
    }
