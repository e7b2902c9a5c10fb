"""
Construção de distribuições a partir do schema JSON de especificação
"""

import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, Union

import numpy as np
from scipy import stats

import config
from distribution import CONTINUOUS, DISCRETE, Distribution, JointDistribution
from exceptions import InputValidationError

logger = logging.getLogger(__name__)

Spec = Dict[str, Any]


def _param(spec: Spec, name: str, default: Any = None, aliases=()) -> Any:
    params = spec.get("params", {}) or {}
    for key in (name, *aliases):
        if key in params:
            return params[key]
        if key in spec:
            return spec[key]
    if default is None:
        raise InputValidationError("parâmetro obrigatório ausente", field=f"params.{name}")
    return default


def _positive(spec: Spec, name: str, aliases=()) -> float:
    value = float(_param(spec, name, aliases=aliases))
    if not np.isfinite(value) or value <= 0:
        raise InputValidationError(f"deve ser positivo, recebido {value}", field=f"params.{name}")
    return value


def _probability(spec: Spec, name: str = "p", open_interval: bool = False) -> float:
    value = float(_param(spec, name))
    valid = 0 < value < 1 if open_interval else 0 <= value <= 1
    if not valid:
        raise InputValidationError(f"probabilidade fora do intervalo: {value}", field=f"params.{name}")
    return value


def _grid_points(spec: Spec) -> int:
    grid = spec.get("grid", {}) or {}
    points = int(grid.get("points", config.DEFAULT_GRID_POINTS))
    if points < 3:
        raise InputValidationError(f"grade precisa de ao menos 3 pontos, recebido {points}", field="grid.points")
    return points


def _tail_quantile(spec: Spec) -> float:
    grid = spec.get("grid", {}) or {}
    q = float(grid.get("quantile", config.TAIL_QUANTILE))
    if not 0 < q < 0.5:
        raise InputValidationError(f"quantil de truncamento inválido: {q}", field="grid.quantile")
    return q


class DistributionFactory:
    """Constrói objetos Distribution a partir de dicionários de especificação"""

    @staticmethod
    def gaussian(spec: Spec) -> Distribution:
        mean = float(_param(spec, "mean", 0.0, aliases=("mu",)))
        var = _positive(spec, "var", aliases=("variance", "sigma2"))
        law = stats.norm(loc=mean, scale=np.sqrt(var))
        return DistributionFactory._truncated_continuous(spec, law, f"gaussian({mean:g},{var:g})", both=True)

    @staticmethod
    def laplace(spec: Spec) -> Distribution:
        mean = float(_param(spec, "mean", 0.0))
        scale = _positive(spec, "scale")
        law = stats.laplace(loc=mean, scale=scale)
        return DistributionFactory._truncated_continuous(spec, law, f"laplace({mean:g},{scale:g})", both=True)

    @staticmethod
    def exponential(spec: Spec) -> Distribution:
        rate = _positive(spec, "rate")
        law = stats.expon(scale=1.0 / rate)
        return DistributionFactory._truncated_continuous(spec, law, f"exponential({rate:g})", both=False)

    @staticmethod
    def gamma(spec: Spec) -> Distribution:
        shape = _positive(spec, "shape")
        rate = _positive(spec, "rate")
        if shape < 1:
            raise InputValidationError("shape < 1 tem densidade ilimitada em 0", field="params.shape")
        law = stats.gamma(a=shape, scale=1.0 / rate)
        return DistributionFactory._truncated_continuous(spec, law, f"gamma({shape:g},{rate:g})", both=False)

    @staticmethod
    def gaussian_mixture(spec: Spec) -> Distribution:
        weights = np.asarray(_param(spec, "weights"), dtype=float)
        means = np.asarray(_param(spec, "means"), dtype=float)
        variances = np.asarray(_param(spec, "vars"), dtype=float)
        if not (weights.shape == means.shape == variances.shape) or weights.size == 0:
            raise InputValidationError("weights, means e vars com tamanhos diferentes", field="params.weights")
        if np.any(weights < 0) or weights.sum() <= 0:
            raise InputValidationError("pesos da mistura inválidos", field="params.weights")
        if np.any(variances <= 0):
            raise InputValidationError("variância não positiva na mistura", field="params.vars")
        q = _tail_quantile(spec)
        laws = [stats.norm(loc=m, scale=np.sqrt(v)) for m, v in zip(means, variances)]
        start = min(law.ppf(q) for law in laws)
        stop = max(law.isf(q) for law in laws)
        support = np.linspace(start, stop, _grid_points(spec))
        density = sum(w * law.pdf(support) for w, law in zip(weights / weights.sum(), laws))
        return Distribution(CONTINUOUS, support, density, label="gaussian-mixture",
                            truncated_left=True, truncated_right=True)

    @staticmethod
    def uniform(spec: Spec) -> Distribution:
        a = float(_param(spec, "a", aliases=("low",)))
        b = float(_param(spec, "b", aliases=("high",)))
        if not b > a:
            raise InputValidationError(f"exige a < b, recebido a={a}, b={b}", field="params.b")
        support = np.linspace(a, b, _grid_points(spec))
        return Distribution(CONTINUOUS, support, np.full(support.size, 1.0 / (b - a)),
                            label=f"uniform({a:g},{b:g})")

    @staticmethod
    def bernoulli(spec: Spec) -> Distribution:
        p = _probability(spec)
        return Distribution(DISCRETE, [0.0, 1.0], [1 - p, p], label=f"bernoulli({p:g})")

    @staticmethod
    def centered_bernoulli(spec: Spec) -> Distribution:
        p = _probability(spec, open_interval=True)
        return Distribution(DISCRETE, [-p, 1 - p], [1 - p, p], label=f"centered-bernoulli({p:g})")

    @staticmethod
    def binomial(spec: Spec) -> Distribution:
        n = int(_param(spec, "n"))
        if n < 1:
            raise InputValidationError(f"n deve ser >= 1, recebido {n}", field="params.n")
        p = _probability(spec, open_interval=True)
        atoms = np.arange(n + 1, dtype=float)
        return Distribution(DISCRETE, atoms, stats.binom.pmf(atoms, n, p), label=f"binomial({n},{p:g})")

    @staticmethod
    def poisson(spec: Spec) -> Distribution:
        lam = _positive(spec, "lambda", aliases=("lam", "rate"))
        q = _tail_quantile(spec)
        # átomo de guarda: a última massa mantida fica abaixo do quantil de corte
        last = int(stats.poisson.isf(q, lam)) + 1
        atoms = np.arange(last + 1, dtype=float)
        return Distribution(DISCRETE, atoms, stats.poisson.pmf(atoms, lam),
                            label=f"poisson({lam:g})", truncated_right=True)

    @staticmethod
    def point_mass(spec: Spec) -> Distribution:
        value = float(_param(spec, "value", aliases=("v", "x")))
        return Distribution(DISCRETE, [value], [1.0], label=f"point-mass({value:g})")

    @staticmethod
    def table(spec: Spec) -> Distribution:
        kind = spec.get("kind", DISCRETE)
        truncated = spec.get("truncated", {}) or {}
        left, right = bool(truncated.get("left", False)), bool(truncated.get("right", False))
        label = spec.get("label", "table")
        if kind == DISCRETE:
            if "atoms" in spec:
                atoms = spec["atoms"]
                if not atoms:
                    raise InputValidationError("lista de átomos vazia", field="atoms")
                try:
                    pairs = sorted((float(a["x"]), float(a["p"])) for a in atoms)
                except (KeyError, TypeError) as e:
                    raise InputValidationError(f"átomo malformado ({e})", field="atoms") from e
                support, weights = zip(*pairs)
            else:
                support, weights = spec.get("support"), spec.get("masses", spec.get("weights"))
                if support is None or weights is None:
                    raise InputValidationError("tabela discreta sem 'atoms' nem 'support'/'masses'", field="atoms")
            return Distribution(DISCRETE, support, weights, label=label, truncated_left=left, truncated_right=right)

        if kind != CONTINUOUS:
            raise InputValidationError(f"tipo desconhecido '{kind}'", field="kind")
        density = spec.get("density")
        if density is None:
            raise InputValidationError("tabela contínua sem 'density'", field="density")
        if "support" in spec:
            support = spec["support"]
        elif "grid" in spec and "start" in spec["grid"]:
            grid = spec["grid"]
            support = np.linspace(float(grid["start"]), float(grid["stop"]), int(grid.get("points", len(density))))
        else:
            raise InputValidationError("tabela contínua sem 'support' nem 'grid'", field="support")
        return Distribution(CONTINUOUS, support, density, label=label, truncated_left=left, truncated_right=right)

    @staticmethod
    def _truncated_continuous(spec: Spec, law, label: str, both: bool) -> Distribution:
        q = _tail_quantile(spec)
        points = _grid_points(spec)
        stop = float(law.isf(q))
        if both:
            center = float(law.median())
            support = _symmetric_grid(center, stop - center, points)
        else:
            support = np.linspace(float(law.ppf(0.0)), stop, points)
        return Distribution(CONTINUOUS, support, law.pdf(support), label=label,
                            truncated_left=both, truncated_right=True)


def _symmetric_grid(center: float, half_width: float, points: int) -> np.ndarray:
    """Grade uniforme espelhada em torno do centro (exata para número ímpar de nós)"""
    if points % 2 == 0:
        return np.linspace(center - half_width, center + half_width, points)
    half = np.linspace(0.0, half_width, (points + 1) // 2)
    return center + np.concatenate([-half[:0:-1], half])


FAMILY_BUILDERS: Dict[str, Callable[[Spec], Distribution]] = {
    "gaussian": DistributionFactory.gaussian,
    "normal": DistributionFactory.gaussian,
    "laplace": DistributionFactory.laplace,
    "exponential": DistributionFactory.exponential,
    "gamma": DistributionFactory.gamma,
    "gaussian-mixture": DistributionFactory.gaussian_mixture,
    "uniform": DistributionFactory.uniform,
    "bernoulli": DistributionFactory.bernoulli,
    "centered-bernoulli": DistributionFactory.centered_bernoulli,
    "binomial": DistributionFactory.binomial,
    "poisson": DistributionFactory.poisson,
    "point-mass": DistributionFactory.point_mass,
    "table": DistributionFactory.table,
}


def build_distribution(spec: Spec) -> Distribution:
    """
    Constrói uma Distribution normalizada a partir da especificação

    Args:
        spec: Dicionário no schema {"family": ..., "params": {...}, "grid": {...}}

    Returns:
        Distribution com momentos em cache
    """
    if not isinstance(spec, dict):
        raise InputValidationError("especificação deve ser um objeto JSON", field="spec")
    family = spec.get("family")
    if family is None:
        raise InputValidationError("campo obrigatório ausente", field="family")
    builder = FAMILY_BUILDERS.get(family)
    if builder is None:
        raise InputValidationError(f"família desconhecida '{family}'", field="family")
    d = builder(spec)
    if spec.get("center"):
        d = d.center()
    if "shift" in spec:
        d = d.shift(float(spec["shift"]))
    logger.debug(f"Distribuição construída: {d.label} ({d.kind}, {d.support.size} nós)")
    return d


def build_joint(spec: Spec) -> JointDistribution:
    """Constrói uma JointDistribution a partir de 'joint-table' ou 'product'"""
    family = spec.get("family")
    if family == "product":
        if "first" not in spec or "second" not in spec:
            raise InputValidationError("produto exige 'first' e 'second'", field="first")
        return JointDistribution.product(build_distribution(spec["first"]), build_distribution(spec["second"]))
    if family == "joint-table":
        for key in ("support_x", "support_y", "weights"):
            if key not in spec:
                raise InputValidationError("campo obrigatório ausente", field=key)
        return JointDistribution(
            kind=spec.get("kind", DISCRETE),
            support_x=spec["support_x"],
            support_y=spec["support_y"],
            weights=spec["weights"],
            label=spec.get("label", "joint-table"),
        )
    raise InputValidationError(f"família conjunta desconhecida '{family}'", field="family")


def distribution_to_spec(d: Distribution) -> Spec:
    """Serializa a Distribution como tabela no mesmo schema aceito na entrada"""
    spec: Spec = {
        "family": "table",
        "kind": d.kind,
        "label": d.label,
        "truncated": {"left": d.truncated_left, "right": d.truncated_right},
    }
    if d.is_continuous:
        spec["support"] = d.support.tolist()
        spec["density"] = d.weights.tolist()
    else:
        spec["atoms"] = [{"x": float(x), "p": float(p)} for x, p in zip(d.support, d.weights)]
    return spec


def load_spec(path: Union[str, Path]) -> Spec:
    """Lê um arquivo JSON de especificação"""
    path = Path(path)
    try:
        with open(path, "r", encoding=config.OUTPUT_ENCODING) as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise InputValidationError(f"arquivo não encontrado: {path}", field=str(path)) from e
    except json.JSONDecodeError as e:
        raise InputValidationError(f"JSON malformado ({e.msg}, linha {e.lineno})", field=str(path)) from e


def load_distribution(path: Union[str, Path]) -> Distribution:
    return build_distribution(load_spec(path))


def load_joint(path: Union[str, Path]) -> JointDistribution:
    return build_joint(load_spec(path))
