"""
Cotas de concentração, constantes K² e cotas de Berry-Esseen
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.special import logsumexp

from config import BERRY_ESSEEN_ZERO_BIAS_CONSTANT
from exceptions import InputValidationError

logger = logging.getLogger(__name__)

# Constantes exigidas por tipo de cota, com a restrição de sinal de cada uma
REQUIRED_CONSTANTS = {
    "subgaussian": {"k2": "nonnegative"},
    "subgamma": {"k2": "nonnegative", "c": "nonnegative"},
    "gamma_function": {"mu": "positive", "c": "positive"},
    "chatterjee": {"ey": "nonnegative"},
    "goldstein": {"var_y": "nonnegative"},
    "hoeffding_stat": {"sum_c2": "nonnegative"},
    "hoeffding_lipschitz": {"lipschitz": "positive", "sum_c2": "nonnegative"},
}

PROVENANCE = {
    "subgaussian": "cauda sub-gaussiana exp(-t²/(2K²))",
    "subgamma": "cauda sub-Gamma exp(-t²/(2(k²+ct)))",
    "gamma_function": "cota tipo função Gamma do size-bias",
    "chatterjee": "2exp(-t²/(4EY+2t)) para a estatística de Hoeffding",
    "goldstein": "2exp(-t²/(2VarY+16t)) para a estatística de Hoeffding",
    "hoeffding_stat": "exp(-t²/Σc²) para a estatística de Hoeffding",
    "hoeffding_lipschitz": "exp(-t²/(L²Σc²)) para funções L-Lipschitz",
}

BERRY_ESSEEN_KINDS = ("zero_bias", "size_bias_D", "size_bias_psi")


def _exp_ratio(numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    """exp(-num/den) com 0/0 tratado como expoente nulo e x/0 como -inf"""
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(
            denominator > 0,
            numerator / np.where(denominator > 0, denominator, 1.0),
            np.where(numerator > 0, np.inf, 0.0),
        )
    return np.exp(-ratio)


@dataclass(frozen=True)
class BoundCurve:
    """Função t ↦ cota(t) com a origem e as constantes usadas"""

    kind: str
    constants: Dict[str, float]
    provenance: str = ""
    validity_threshold: float = 0.0

    def evaluate(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        c = self.constants
        if self.kind == "subgaussian":
            values = _exp_ratio(t ** 2, 2 * c["k2"] + 0 * t)
        elif self.kind == "subgamma":
            values = _exp_ratio(t ** 2, 2 * (c["k2"] + c["c"] * t))
        elif self.kind == "gamma_function":
            mu, scale = c["mu"], c["c"]
            safe = np.maximum(t, mu)
            exponent = (safe - mu) / scale - (safe / scale) * np.log(safe / mu)
            values = np.where(t >= mu, np.exp(exponent), 1.0)
        elif self.kind == "chatterjee":
            values = 2 * _exp_ratio(t ** 2, 4 * c["ey"] + 2 * t)
        elif self.kind == "goldstein":
            values = 2 * _exp_ratio(t ** 2, 2 * c["var_y"] + 16 * t)
        elif self.kind == "hoeffding_stat":
            values = _exp_ratio(t ** 2, c["sum_c2"] + 0 * t)
        else:
            values = _exp_ratio(t ** 2, c["lipschitz"] ** 2 * c["sum_c2"] + 0 * t)
        return np.clip(values, 0.0, 1.0)

    def __call__(self, t):
        return self.evaluate(t)

    def to_frame(self, t_grid: Iterable[float]) -> pd.DataFrame:
        t = np.asarray(list(t_grid), dtype=float)
        return pd.DataFrame({"t": t, "bound": self.evaluate(t)})


def _validate_constants(kind: str, constants: Dict[str, float]) -> Dict[str, float]:
    if kind not in REQUIRED_CONSTANTS:
        raise InputValidationError(f"tipo de cota desconhecido '{kind}'", field="kind")
    checked = {}
    for name, sign in REQUIRED_CONSTANTS[kind].items():
        if constants.get(name) is None:
            raise InputValidationError(f"constante obrigatória para '{kind}'", field=name)
        value = float(constants[name])
        if not math.isfinite(value):
            raise InputValidationError("valor não finito", field=name)
        if sign == "positive" and value <= 0:
            raise InputValidationError(f"deve ser positivo, recebido {value}", field=name)
        if sign == "nonnegative" and value < 0:
            raise InputValidationError(f"deve ser não negativo, recebido {value}", field=name)
        checked[name] = value
    return checked


def bound_curve(kind: str, constants: Dict[str, float]) -> BoundCurve:
    """Valida as constantes e devolve a curva de cota correspondente"""
    checked = _validate_constants(kind, constants)
    threshold = checked["mu"] if kind == "gamma_function" else 0.0
    return BoundCurve(kind=kind, constants=checked, provenance=PROVENANCE[kind],
                      validity_threshold=threshold)


def tail_bound(kind: str, constants: Dict[str, float], t: float) -> float:
    """
    Avalia uma cota de cauda em t >= 0

    Args:
        kind: Um dos tipos em REQUIRED_CONSTANTS
        constants: Constantes nomeadas (k2, c, mu, ey, var_y, sum_c2, lipschitz)
        t: Ponto de avaliação

    Returns:
        Valor da cota, limitado a [0, 1]
    """
    if t < 0:
        raise InputValidationError(f"t deve ser >= 0, recebido {t}", field="t")
    return float(bound_curve(kind, constants).evaluate(t))


# ---------------------------------------------------------------- constantes K²


def _as_sigma(sigma: Sequence[float]) -> np.ndarray:
    values = np.asarray(sigma, dtype=float).ravel()
    if values.size == 0:
        raise InputValidationError("vetor vazio", field="sigma")
    if np.any(values <= 0):
        raise InputValidationError("todos os σ_i devem ser positivos", field="sigma")
    return values


def _as_matrix(k, n: int, name: str = "k") -> np.ndarray:
    matrix = np.asarray(k, dtype=float)
    if matrix.shape != (n, n):
        raise InputValidationError(f"forma {matrix.shape}, esperado ({n}, {n})", field=name)
    if np.any(matrix < 0):
        raise InputValidationError("constantes k_ji negativas", field=name)
    return matrix


def _log_sum(log_terms: np.ndarray) -> float:
    return float(np.exp(logsumexp(log_terms)))


def aggregate_K2(sigma: Sequence[float], k) -> float:
    """
    K² = Σ_i σ_i^(2-2n) Π_j k_ji², avaliada em escala logarítmica

    Args:
        sigma: Desvios padrão σ_1..σ_n
        k: Matriz n×n com k[j][i] = k_ji

    Returns:
        Constante sub-gaussiana da soma
    """
    sigma = _as_sigma(sigma)
    n = sigma.size
    k = _as_matrix(k, n)
    with np.errstate(divide="ignore"):
        log_k2 = 2 * np.log(k)
    log_terms = (2 - 2 * n) * np.log(sigma) + log_k2.sum(axis=0)
    return _log_sum(log_terms)


def _neighborhood(params: dict) -> float:
    sigma = _as_sigma(params["sigma"])
    n = sigma.size
    k = _as_matrix(params["k"], n)
    neighborhoods = params["neighborhoods"]
    if len(neighborhoods) != n:
        raise InputValidationError(f"{len(neighborhoods)} vizinhanças para n={n}", field="neighborhoods")
    log_terms = np.empty(n)
    for i, members in enumerate(neighborhoods):
        members = sorted(set(int(j) for j in members))
        if i not in members or members[0] < 0 or members[-1] >= n:
            raise InputValidationError(f"vizinhança {i} inválida (deve conter {i})", field="neighborhoods")
        with np.errstate(divide="ignore"):
            log_terms[i] = (2 - 2 * len(members)) * math.log(sigma[i]) + 2 * np.log(k[members, i]).sum()
    return _log_sum(log_terms)


def _linear(params: dict) -> float:
    a = np.asarray(params["a"], dtype=float).ravel()
    if np.any(a < 0) or not np.any(a > 0):
        raise InputValidationError("pesos devem ser não negativos e não todos nulos", field="a")
    k = _as_matrix(params["k"], a.size)
    with np.errstate(divide="ignore"):
        log_terms = 2 * np.log(a) + 2 * np.log(k).sum(axis=0)
    return _log_sum(log_terms) / float(np.dot(a, a))


def _intervals(params: dict) -> np.ndarray:
    intervals = np.asarray(params["intervals"], dtype=float)
    if intervals.ndim != 2 or intervals.shape[1] != 2:
        raise InputValidationError("esperado lista de pares [a_i, b_i]", field="intervals")
    if np.any(intervals[:, 0] >= 0) or np.any(intervals[:, 1] <= 0):
        raise InputValidationError("cada intervalo precisa de a_i < 0 < b_i", field="intervals")
    return intervals


def _bounded(params: dict) -> float:
    intervals = _intervals(params)
    extreme = np.maximum(intervals[:, 0] ** 2, intervals[:, 1] ** 2)
    if params.get("independent", False):
        return 0.5 * float(extreme.sum())
    sigma = _as_sigma(params["sigma"])
    n = sigma.size
    if intervals.shape[0] != n:
        raise InputValidationError(f"{intervals.shape[0]} intervalos para n={n}", field="intervals")
    log_terms = (2 - 2 * n) * np.log(sigma) + math.log(0.5) + n * np.log(extreme)
    return _log_sum(log_terms)


def _mcdiarmid(params: dict) -> float:
    c = np.asarray(params["c"], dtype=float).ravel()
    if c.size == 0 or np.any(c < 0):
        raise InputValidationError("constantes c_i devem ser não negativas", field="c")
    return float(np.sum(c ** 2)) / 8


def _independent(params: dict) -> float:
    k_diag = np.asarray(params["k_diag"], dtype=float).ravel()
    if np.any(k_diag < 0):
        raise InputValidationError("constantes k_ii negativas", field="k_diag")
    return float(np.sum(k_diag ** 2))


def _hoeffding_classic(params: dict) -> float:
    intervals = _intervals(params)
    return float(np.sum((intervals[:, 1] - intervals[:, 0]) ** 2)) / 4


K2_SPECIALIZATIONS = {
    "neighborhood": _neighborhood,
    "linear": _linear,
    "bounded": _bounded,
    "mcdiarmid": _mcdiarmid,
    "independent": _independent,
    "hoeffding_classic": _hoeffding_classic,
}


def specialize_K2(kind: str, params: dict) -> float:
    """
    Fórmulas fechadas de K² para as estruturas de dependência usuais

    Args:
        kind: neighborhood, linear, bounded, mcdiarmid, independent ou hoeffding_classic
        params: Parâmetros da estrutura (sigma, k, neighborhoods, a, intervals, c, k_diag)

    Returns:
        Constante K²
    """
    if kind not in K2_SPECIALIZATIONS:
        raise InputValidationError(f"especialização desconhecida '{kind}'", field="kind")
    try:
        return K2_SPECIALIZATIONS[kind](params)
    except KeyError as e:
        raise InputValidationError(f"parâmetro obrigatório para '{kind}'", field=str(e.args[0])) from e


# ------------------------------------------------------------- Berry-Esseen


@dataclass(frozen=True)
class BerryEsseenInput:
    """Insumos das cotas de Kolmogorov via acoplamentos zero-bias e size-bias"""

    sigma2: float
    mu: Optional[float] = None
    A: Optional[float] = None
    D: Optional[float] = None
    Psi: Optional[float] = None
    delta: Optional[float] = None

    def __post_init__(self):
        if self.sigma2 is None or self.sigma2 <= 0:
            raise InputValidationError(f"deve ser positivo, recebido {self.sigma2}", field="sigma2")
        for name in ("mu", "A", "D", "Psi", "delta"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise InputValidationError(f"deve ser não negativo, recebido {value}", field=name)

    def require(self, *names: str) -> None:
        for name in names:
            if getattr(self, name) is None:
                raise InputValidationError("campo obrigatório para esta cota", field=name)


def berry_esseen_bound(kind: str, data: BerryEsseenInput) -> float:
    """
    Cota de d_Kol(X, N) pelos acoplamentos zero-bias ou size-bias

    Args:
        kind: zero_bias, size_bias_D ou size_bias_psi
        data: BerryEsseenInput com os campos exigidos pelo tipo

    Returns:
        Valor da cota (sem truncamento em 1)
    """
    if kind == "zero_bias":
        data.require("delta")
        return BERRY_ESSEEN_ZERO_BIAS_CONSTANT * data.delta
    sigma = math.sqrt(data.sigma2)
    if kind == "size_bias_D":
        data.require("mu", "A", "D")
        if data.mu <= 0:
            raise InputValidationError("μ deve ser positivo", field="mu")
        root = math.sqrt(11 * data.A ** 2 / sigma + 5 * data.sigma2 * data.D / data.mu)
        return data.mu / (6 * data.sigma2) * (root + 2 * data.A / math.sqrt(sigma)) ** 2
    if kind == "size_bias_psi":
        data.require("mu", "A", "Psi")
        return 6 * data.mu * data.A ** 2 / sigma ** 3 + 2 * data.mu * data.Psi / data.sigma2
    raise InputValidationError(f"tipo desconhecido '{kind}'", field="kind")
