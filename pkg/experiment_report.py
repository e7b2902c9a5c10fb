"""
Relatórios de Monte Carlo: caudas empíricas, bandas DKW e comparação com cotas
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

import config
from distribution import Distribution
from exceptions import InputValidationError

logger = logging.getLogger(__name__)

CERTIFIED = "certified"
VIOLATED = "violated"
UNRESOLVED = "unresolved"


def dkw_epsilon(n: int, confidence: float = config.DKW_CONFIDENCE) -> float:
    """Meia-largura ε = sqrt(ln(2/α) / (2n)) da banda de Dvoretzky-Kiefer-Wolfowitz"""
    if n < 1:
        raise InputValidationError(f"deve ser >= 1, recebido {n}", field="n")
    alpha = 1.0 - confidence
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


def empirical_tail(samples: np.ndarray, t_grid: np.ndarray) -> np.ndarray:
    """P̂(Z >= t) para cada t da grade"""
    ordered = np.sort(np.asarray(samples, dtype=float))
    below = np.searchsorted(ordered, t_grid, side="left")
    return 1.0 - below / ordered.size


def empirical_kolmogorov(samples: np.ndarray, d: Distribution) -> float:
    """sup |F_n - F| entre a CDF empírica e a lei, com limites à esquerda"""
    ordered = np.sort(np.asarray(samples, dtype=float))
    points = np.union1d(d.support, ordered)
    right = np.searchsorted(ordered, points, side="right") / ordered.size
    left = np.searchsorted(ordered, points, side="left") / ordered.size
    return float(max(np.max(np.abs(right - d.cdf(points))), np.max(np.abs(left - d.cdf_left(points)))))


@dataclass
class BoundCheck:
    """Uma curva de cota comparada à banda empírica ponto a ponto"""

    name: str
    values: np.ndarray
    statuses: List[str]
    passed: bool
    skipped: bool = False
    note: str = ""
    violations: List[float] = field(default_factory=list)

    @classmethod
    def skip(cls, name: str, note: str) -> "BoundCheck":
        logger.info(f"⚠️ cota {name} ignorada: {note}")
        return cls(name=name, values=np.array([]), statuses=[], passed=True, skipped=True, note=note)

    def to_dict(self) -> Dict[str, Any]:
        counts = {status: self.statuses.count(status) for status in (CERTIFIED, VIOLATED, UNRESOLVED)}
        return {
            "name": self.name,
            "passed": self.passed,
            "skipped": self.skipped,
            "note": self.note,
            "status_counts": counts,
            "violations": self.violations,
        }


def compare_band(name: str, t_grid: np.ndarray, tail: np.ndarray, epsilon: float,
                 bound_values: np.ndarray) -> BoundCheck:
    """
    Classifica cada t como certificado, violado ou não resolvido

    A cota passa quando nenhum t é violado e todo t com cota de pelo menos
    BAND_RESOLUTION_FACTOR·ε é certificado; abaixo disso a banda não
    distingue a cota de zero.
    """
    band_hi = np.minimum(tail + epsilon, 1.0)
    band_lo = np.maximum(tail - epsilon, 0.0)
    statuses = np.where(band_hi <= bound_values, CERTIFIED,
                        np.where(band_lo > bound_values, VIOLATED, UNRESOLVED))
    required = bound_values >= config.BAND_RESOLUTION_FACTOR * epsilon
    violated = statuses == VIOLATED
    passed = not violated.any() and bool(np.all(statuses[required] == CERTIFIED))
    unresolved = int(np.count_nonzero(required & (statuses == UNRESOLVED)))
    if unresolved:
        logger.warning(f"⚠️ cota {name}: {unresolved} pontos resolvíveis sem certificação")
    return BoundCheck(
        name=name,
        values=bound_values,
        statuses=statuses.tolist(),
        passed=passed,
        violations=t_grid[violated].tolist(),
    )


def compare_degenerate(name: str, t_grid: np.ndarray, tail: np.ndarray,
                       bound_values: np.ndarray) -> BoundCheck:
    """Cota com Σc² = 0: a cauda empírica precisa ser exatamente 0 para t > 0"""
    positive = t_grid > 0
    statuses = np.where(~positive | (tail == 0.0), CERTIFIED, VIOLATED)
    violated = statuses == VIOLATED
    return BoundCheck(
        name=name,
        values=bound_values,
        statuses=statuses.tolist(),
        passed=not violated.any(),
        note="constantes nulas: cauda exatamente 0 para t > 0",
        violations=t_grid[violated].tolist(),
    )


@dataclass
class ExperimentReport:
    """
    Resumo de um experimento de Monte Carlo

    O tempo de execução fica fora de to_dict para que configurações
    idênticas produzam arquivos idênticos.
    """

    experiment: str
    seed: int
    n_samples: int
    t_grid: np.ndarray
    columns: Dict[str, np.ndarray]
    bounds: Dict[str, BoundCheck]
    statistics: Dict[str, Any] = field(default_factory=dict)
    assertions: Dict[str, bool] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)
    parameters: Dict[str, Any] = field(default_factory=dict)
    runtime_seconds: Optional[float] = None

    @property
    def exploratory(self) -> bool:
        return self.n_samples < config.MIN_REPORT_SAMPLES

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.bounds.values()) and all(self.assertions.values())

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"t": self.t_grid})
        for name, values in self.columns.items():
            frame[name] = values
        return frame

    def to_dict(self) -> Dict[str, Any]:
        return {
            "experiment": self.experiment,
            "seed": self.seed,
            "n_samples": self.n_samples,
            "exploratory": self.exploratory,
            "passed": self.passed,
            "parameters": self.parameters,
            "statistics": self.statistics,
            "assertions": self.assertions,
            "bounds": {name: check.to_dict() for name, check in self.bounds.items()},
            "notes": self.notes,
            "table": {name: values.tolist() for name, values in self.to_frame().items()},
        }

    def log_summary(self) -> None:
        logger.info(f"📊 {self.experiment}: {self.n_samples} amostras, semente {self.seed}")
        for name, check in self.bounds.items():
            if check.skipped:
                continue
            status = "✅" if check.passed else "❌"
            logger.info(f"{status} cota {name}: {check.statuses.count(CERTIFIED)}/{len(check.statuses)} pontos certificados")
        for name, ok in self.assertions.items():
            logger.info(f"{'✅' if ok else '❌'} {name}")
        if self.runtime_seconds is not None:
            logger.info(f"⏱️ tempo de execução: {self.runtime_seconds:.2f}s")


def report_frame(payload: Dict[str, Any]) -> pd.DataFrame:
    """Tabela companheira (t, empírico, banda, cotas) a partir do relatório serializado"""
    return pd.DataFrame(payload["table"])
