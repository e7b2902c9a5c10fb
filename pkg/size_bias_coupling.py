"""
Acoplamento size-bias para somas independentes e estimação de D e Ψ
"""

import hashlib
import json
import logging
import math
import time
from dataclasses import dataclass, field
from functools import reduce
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy import stats

import config
from bound_calculator import bound_curve
from certificate_verifier import find_min_shift
from distribution import Distribution, convolve, derive_rng
from distribution_factory import distribution_to_spec
from exceptions import InputValidationError
from experiment_report import (
    BoundCheck,
    ExperimentReport,
    compare_band,
    dkw_epsilon,
    empirical_kolmogorov,
    empirical_tail,
)
from transforms import size_bias

logger = logging.getLogger(__name__)

EXACT = "exact"
SAMPLING = "sampling"
AUTO = "auto"


@dataclass(frozen=True)
class SumCouplingConfig:
    """
    Componentes independentes não negativos de Y = Σ X_i

    shifts[i] é a constante c_i de X_i^s ≤_st X_i + c_i; quando ausente vem
    de find_min_shift(X_i, t0=0).
    """

    components: List[Distribution]
    n_samples: int
    seed: int
    shifts: Optional[List[float]] = None
    t_grid: Optional[np.ndarray] = None
    biased: List[Distribution] = field(init=False, repr=False)

    def __post_init__(self):
        if not self.components:
            raise InputValidationError("lista de componentes vazia", field="components")
        if self.n_samples < 1:
            raise InputValidationError(f"deve ser >= 1, recebido {self.n_samples}", field="samples")
        if self.seed is None or self.seed < 0:
            raise InputValidationError("semente obrigatória e não negativa", field="seed")
        for index, d in enumerate(self.components):
            if np.any((d.support < 0) & (d.weights > 0)):
                raise InputValidationError(f"componente {index} com suporte negativo", field="components")
            if d.mean <= 0:
                raise InputValidationError(f"componente {index} com média {d.mean:g}", field="components")
        if self.shifts is not None and len(self.shifts) != len(self.components):
            raise InputValidationError(
                f"{len(self.shifts)} deslocamentos para {len(self.components)} componentes", field="shifts"
            )
        object.__setattr__(self, "biased", [size_bias(d).output for d in self.components])

    @property
    def means(self) -> np.ndarray:
        return np.array([d.mean for d in self.components])

    @property
    def all_discrete(self) -> bool:
        return not any(d.is_continuous for d in self.components)

    def resolved_shifts(self) -> List[float]:
        if self.shifts is not None:
            return [float(c) for c in self.shifts]
        shifts = []
        for index, d in enumerate(self.components):
            c = find_min_shift(d, 0.0)
            if c is None:
                raise InputValidationError(
                    f"componente {index} ('{d.label}') sem deslocamento certificado", field="shifts"
                )
            shifts.append(c)
        return shifts

    def cache_key(self, operation: str) -> str:
        payload = {
            "components": [distribution_to_spec(d) for d in self.components],
            "n_samples": self.n_samples,
            "seed": self.seed,
            "shifts": self.shifts,
            "t_grid": None if self.t_grid is None else np.asarray(self.t_grid, dtype=float).tolist(),
        }
        digest = hashlib.md5(json.dumps(payload, sort_keys=True).encode()).hexdigest()
        return f"{operation}_{digest}"


class CouplingDraws(NamedTuple):
    """Pares (Y, Y^s) e o índice I sorteado em cada réplica"""

    y: np.ndarray
    y_biased: np.ndarray
    index: np.ndarray

    @property
    def difference(self) -> np.ndarray:
        return self.y_biased - self.y


def _draw_batch(cfg: SumCouplingConfig, batch: int, size: int) -> CouplingDraws:
    rng = derive_rng(cfg.seed, batch)
    m = len(cfg.components)
    u = rng.random((size, m))
    values = np.column_stack([d.quantile(u[:, j]) for j, d in enumerate(cfg.components)])
    probabilities = cfg.means / cfg.means.sum()
    index = np.minimum(np.searchsorted(np.cumsum(probabilities), rng.random(size), side="right"), m - 1)

    rows = np.arange(size)
    chosen = values[rows, index]
    # X_I^s pelo mesmo U de X_I: acoplamento monótono, independente dos demais X_j
    replaced = np.empty(size)
    for j, biased in enumerate(cfg.biased):
        mask = index == j
        if mask.any():
            replaced[mask] = biased.quantile(u[mask, j])
    y = values.sum(axis=1)
    return CouplingDraws(y=y, y_biased=y - chosen + replaced, index=index)


def sum_size_bias_coupling(cfg: SumCouplingConfig) -> CouplingDraws:
    """
    Pares (Y, Y^s) com Y^s = Y - X_I + X_I^s e P(I = i) = μ_i / Σμ_j

    Args:
        cfg: SumCouplingConfig validada

    Returns:
        CouplingDraws na ordem dos lotes de réplicas
    """
    full, rest = divmod(cfg.n_samples, config.REPLICATE_BATCH)
    sizes = [config.REPLICATE_BATCH] * full + ([rest] if rest else [])
    parts = [_draw_batch(cfg, b, size) for b, size in enumerate(sizes)]
    return CouplingDraws(
        y=np.concatenate([p.y for p in parts]),
        y_biased=np.concatenate([p.y_biased for p in parts]),
        index=np.concatenate([p.index for p in parts]),
    )


def _sum_law(cfg: SumCouplingConfig) -> Optional[Distribution]:
    if not cfg.all_discrete:
        return None
    return reduce(convolve, cfg.components)


def verify_coupling_bound(cfg: SumCouplingConfig) -> ExperimentReport:
    """
    Confere Y^s <= Y + max c_i em todas as réplicas e a cota tipo função Gamma de Y

    Args:
        cfg: SumCouplingConfig (deslocamentos fornecidos ou certificados)

    Returns:
        ExperimentReport; réplicas violadas trazem (lote, posição) para replay
    """
    start = time.perf_counter()
    shifts = cfg.resolved_shifts()
    c_max = max(shifts)
    logger.info(f"🎲 acoplamento size-bias: {len(cfg.components)} componentes, max c_i = {c_max:g}")

    draws = sum_size_bias_coupling(cfg)
    difference = draws.difference
    violating = np.flatnonzero(difference > c_max + config.EPS_COUPLING)
    replay = [{"batch": int(i // config.REPLICATE_BATCH), "position": int(i % config.REPLICATE_BATCH)}
              for i in violating[:20]]
    if violating.size:
        logger.error(f"❌ {violating.size} réplicas violam Y^s <= Y + {c_max:g}")

    mu = float(cfg.means.sum())
    top = float(sum(d.hull[1] for d in cfg.components))
    t_grid = (np.asarray(cfg.t_grid, dtype=float) if cfg.t_grid is not None
              else np.linspace(0.0, max(top, mu), 41))
    epsilon = dkw_epsilon(cfg.n_samples)
    tail = empirical_tail(draws.y, t_grid)
    columns = {"empirical": tail, "band_hi": np.minimum(tail + epsilon, 1.0)}
    bounds: Dict[str, BoundCheck] = {}
    if c_max > 0:
        values = bound_curve("gamma_function", {"mu": mu, "c": c_max}).evaluate(t_grid)
        bounds["gamma_function"] = compare_band("gamma_function", t_grid, tail, epsilon, values)
        columns["bound_gamma_function"] = values
    else:
        bounds["gamma_function"] = BoundCheck.skip("gamma_function", "max c_i = 0: Y^s = Y")

    statistics: Dict[str, Any] = {
        "max_difference": float(difference.max()),
        "min_difference": float(difference.min()),
        "violations": int(violating.size),
        "replay": replay,
        "shifts": shifts,
        "mu": mu,
        "dkw_epsilon": epsilon,
    }
    assertions = {"Y^s <= Y + max c_i em todas as réplicas": violating.size == 0}
    notes = []

    law = _sum_law(cfg)
    if law is not None:
        threshold = dkw_epsilon(cfg.n_samples, config.DKW_VALIDATION_CONFIDENCE)
        statistics["kolmogorov_y"] = empirical_kolmogorov(draws.y, law)
        statistics["kolmogorov_y_biased"] = empirical_kolmogorov(draws.y_biased, size_bias(law).output)
        statistics["kolmogorov_threshold"] = threshold
        assertions["Y segue a convolução dos componentes"] = statistics["kolmogorov_y"] <= threshold
        assertions["Y^s segue o size-bias da convolução"] = statistics["kolmogorov_y_biased"] <= threshold
    else:
        notes.append("componentes contínuos: validação distribucional por convolução não realizada")

    report = ExperimentReport(
        experiment="sum-coupling",
        seed=cfg.seed,
        n_samples=cfg.n_samples,
        t_grid=t_grid,
        columns=columns,
        bounds=bounds,
        statistics=statistics,
        assertions=assertions,
        notes=notes,
        parameters={"components": [d.label for d in cfg.components]},
        runtime_seconds=time.perf_counter() - start,
    )
    report.log_summary()
    return report


# ------------------------------------------------------------------ D e Ψ


@dataclass(frozen=True)
class DPsiEstimate:
    """D e Ψ com intervalos (largura zero no modo exato) e as entradas de Berry-Esseen"""

    D: float
    D_interval: Tuple[float, float]
    Psi: float
    Psi_interval: Tuple[float, float]
    mode: str
    mu: float
    sigma2: float
    A: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "D": self.D,
            "D_interval": list(self.D_interval),
            "Psi": self.Psi,
            "Psi_interval": list(self.Psi_interval),
            "mode": self.mode,
            "mu": self.mu,
            "sigma2": self.sigma2,
            "A": self.A,
        }


def _comonotone_shift(d: Distribution, biased: Distribution) -> Tuple[np.ndarray, float]:
    """
    E[X^s - X | X = x] por átomo de X sob o acoplamento por quantis,
    e o maior |X^s - X| com probabilidade positiva
    """
    breaks = np.union1d(d._cdf_nodes, biased._cdf_nodes)
    breaks = np.union1d(breaks, [0.0])
    widths = np.diff(breaks)
    keep = widths > 0
    middle = 0.5 * (breaks[:-1] + breaks[1:])[keep]
    widths = widths[keep]
    x = d.quantile(middle)
    delta = biased.quantile(middle) - x
    index = np.searchsorted(d.support, x)
    numerator = np.bincount(index, weights=widths * delta, minlength=d.support.size)
    mass = np.bincount(index, weights=widths, minlength=d.support.size)
    conditional = np.divide(numerator, mass, out=np.zeros_like(numerator), where=mass > 0)
    # fatias de largura ~1e-16 nascem só do arredondamento das duas CDFs
    visible = widths > config.EPS_MASS
    spread = float(np.max(np.abs(delta[visible]))) if visible.any() else 0.0
    return conditional, spread


def _d_and_psi(prob: np.ndarray, g: np.ndarray, mu: float, sigma: float) -> Tuple[float, float]:
    if sigma > 0:
        terms = np.abs(1.0 - (mu / sigma) * g)
    else:
        # lei degenerada: só g = 0 é possível e o termo vale 1
        terms = np.where(g == 0, 1.0, np.inf)
    mean_g = float(np.dot(prob, g))
    psi = math.sqrt(max(float(np.dot(prob, (g - mean_g) ** 2)), 0.0))
    return float(np.dot(prob, terms)), psi


def _aggregate_by_atom(values: np.ndarray, weights: np.ndarray, numerators: np.ndarray):
    atoms, inverse = np.unique(np.round(values, 12), return_inverse=True)
    prob = np.bincount(inverse, weights=weights)
    total = np.bincount(inverse, weights=numerators)
    g = np.divide(total, prob, out=np.zeros_like(total), where=prob > 0)
    return atoms, prob, g


def _exact_d_psi(cfg: SumCouplingConfig) -> DPsiEstimate:
    weights = cfg.means / cfg.means.sum()
    supports, masses, conditionals, spread = [], [], [], 0.0
    for d, biased, w in zip(cfg.components, cfg.biased, weights):
        conditional, largest = _comonotone_shift(d, biased)
        positive = d.weights > 0
        supports.append(d.support[positive])
        masses.append(d.weights[positive])
        conditionals.append(w * conditional[positive])
        spread = max(spread, largest)

    y = reduce(np.add.outer, supports).ravel()
    prob = reduce(np.multiply.outer, masses).ravel()
    expected = reduce(np.add.outer, conditionals).ravel()
    _, p_y, g = _aggregate_by_atom(y, prob, prob * expected)

    mu = float(np.dot(prob, y))
    sigma2 = max(float(np.dot(prob, (y - mu) ** 2)), 0.0)
    D, psi = _d_and_psi(p_y, g, mu, math.sqrt(sigma2))
    return DPsiEstimate(D=D, D_interval=(D, D), Psi=psi, Psi_interval=(psi, psi), mode=EXACT,
                        mu=mu, sigma2=sigma2, A=spread)


def _sampling_d_psi(cfg: SumCouplingConfig) -> DPsiEstimate:
    groups = config.BATCH_MEANS_GROUPS
    if cfg.n_samples < 2 * groups:
        raise InputValidationError(f"modo amostral exige ao menos {2 * groups} réplicas", field="samples")
    law = reduce(convolve, cfg.components)
    mu, sigma2 = law.mean, law.variance
    draws = sum_size_bias_coupling(cfg)

    estimates = []
    for y, diff in zip(np.array_split(draws.y, groups), np.array_split(draws.difference, groups)):
        _, p_y, g = _aggregate_by_atom(y, np.full(y.size, 1.0 / y.size), diff / y.size)
        estimates.append(_d_and_psi(p_y, g, mu, math.sqrt(sigma2)))
    estimates = np.array(estimates)
    quantile = stats.t.ppf(0.5 + config.BATCH_MEANS_CONFIDENCE / 2, groups - 1)

    def interval(column: np.ndarray) -> Tuple[float, float, float]:
        center = float(column.mean())
        half = float(quantile * column.std(ddof=1) / math.sqrt(groups))
        return center, center - half, center + half

    D, d_low, d_high = interval(estimates[:, 0])
    psi, p_low, p_high = interval(estimates[:, 1])
    spread = float(np.max(np.abs(draws.difference)))
    return DPsiEstimate(D=D, D_interval=(d_low, d_high), Psi=psi, Psi_interval=(p_low, p_high),
                        mode=SAMPLING, mu=mu, sigma2=sigma2, A=spread)


def estimate_D_psi(cfg: SumCouplingConfig, mode: str = AUTO) -> DPsiEstimate:
    """
    D = E|1 - (μ/σ) E[Y^s - Y | Y]| e Ψ = sqrt(Var E[Y^s - Y | Y])

    Args:
        cfg: Componentes discretos
        mode: 'exact' (enumeração), 'sampling' (médias por grupos) ou 'auto'

    Returns:
        DPsiEstimate pronto para berry_esseen_bound
    """
    if not cfg.all_discrete:
        raise InputValidationError(
            "D e Ψ só para componentes discretos; use a cota zero-bias para leis contínuas",
            field="components",
        )
    combinations = float(np.prod([np.count_nonzero(d.weights > 0) for d in cfg.components]))
    if mode == AUTO:
        mode = EXACT if combinations <= config.EXACT_ENUMERATION_LIMIT else SAMPLING
    if mode == EXACT:
        if combinations > config.EXACT_ENUMERATION_LIMIT:
            raise InputValidationError(f"{combinations:.0f} combinações excedem o limite", field="mode")
        estimate = _exact_d_psi(cfg)
    elif mode == SAMPLING:
        estimate = _sampling_d_psi(cfg)
    else:
        raise InputValidationError(f"modo desconhecido '{mode}'", field="mode")
    logger.info(f"📊 D = {estimate.D:.6g}, Ψ = {estimate.Psi:.6g} (modo {estimate.mode})")
    return estimate
