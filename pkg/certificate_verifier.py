"""
Certificados numéricos das condições suficientes e das conclusões dos teoremas
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Union

import numpy as np
from scipy import stats

import config
from distribution import CONTINUOUS, Distribution, mgf_eval
from exceptions import InputValidationError
from order_checker import OrderVerdict, check_convex, check_st, check_weighted, sign_sequence
from transforms import size_bias, zero_bias

logger = logging.getLogger(__name__)

VERIFIED = "verified"
HYPOTHESIS_FAILED = "hypothesis_failed"
CONCLUSION_VIOLATED = "conclusion_violated"


@dataclass(frozen=True)
class HypothesisCheck:
    """Uma hipótese testada na grade, com margem assinada e testemunha"""

    name: str
    holds: bool
    margin: float
    witness: Optional[float] = None
    verdict: Optional[OrderVerdict] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "holds": self.holds,
            "margin": self.margin,
            "witness": self.witness,
            "verdict": self.verdict.to_dict() if self.verdict else None,
        }


@dataclass(frozen=True)
class ConclusionCheck:
    """Conclusão conferida: pior violação observada contra a tolerância"""

    description: str
    worst_violation: float
    tolerance: float
    witness: Optional[float] = None

    @property
    def holds(self) -> bool:
        return self.worst_violation <= self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        return {
            "description": self.description,
            "worst_violation": self.worst_violation,
            "tolerance": self.tolerance,
            "witness": self.witness,
            "holds": self.holds,
        }


@dataclass(frozen=True)
class Certificate:
    """Registro auditável de uma verificação: hipóteses, conclusões e veredito"""

    claim: str
    hypothesis_checks: List[HypothesisCheck]
    conclusion_checks: List[ConclusionCheck]
    verdict: str
    parameters: Dict[str, Any] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def verified(self) -> bool:
        return self.verdict == VERIFIED

    @property
    def conclusion_check(self) -> Optional[ConclusionCheck]:
        return self.conclusion_checks[0] if self.conclusion_checks else None

    @property
    def witness(self) -> Optional[float]:
        """Testemunha da primeira falha relevante para o veredito"""
        if self.verdict == CONCLUSION_VIOLATED:
            return next(c.witness for c in self.conclusion_checks if not c.holds)
        if self.verdict == HYPOTHESIS_FAILED:
            return next(h.witness for h in self.hypothesis_checks if not h.holds)
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "claim": self.claim,
            "verdict": self.verdict,
            "witness": self.witness,
            "parameters": self.parameters,
            "hypothesis_checks": [h.to_dict() for h in self.hypothesis_checks],
            "conclusion_checks": [c.to_dict() for c in self.conclusion_checks],
            "notes": self.notes,
            "details": self.details,
        }


def _hypothesis_first(hypotheses: List[HypothesisCheck], conclusions: List[ConclusionCheck]) -> str:
    if not all(h.holds for h in hypotheses):
        return HYPOTHESIS_FAILED
    if not all(c.holds for c in conclusions):
        return CONCLUSION_VIOLATED
    return VERIFIED


def _finish(certificate: Certificate) -> Certificate:
    if certificate.verified:
        logger.info(f"✅ {certificate.claim}: verificado")
    else:
        logger.info(f"❌ {certificate.claim}: {certificate.verdict} (testemunha {certificate.witness})")
    return certificate


def _require_centered(d: Distribution) -> None:
    if abs(d.mean) > config.EPS_CENTERED:
        raise InputValidationError(f"lei não centrada: média {d.mean:.3e}", field="mean")
    if d.variance <= 0:
        raise InputValidationError("variância nula", field="variance")


def _require_continuous(d: Distribution, what: str) -> None:
    if d.kind != CONTINUOUS:
        raise InputValidationError(f"{what} exige densidade; lei discreta recebida", field="kind")


def _resolved_density(f: np.ndarray) -> np.ndarray:
    """Nós onde log f tem precisão plena; subnormais e o extremo da cauda ficam de fora"""
    floor = max(float(np.finfo(float).tiny), float(f.max()) * config.LOG_DENSITY_FLOOR)
    return f >= floor


def _order_hypothesis(name: str, verdict: OrderVerdict) -> HypothesisCheck:
    return HypothesisCheck(name=name, holds=verdict.holds, margin=verdict.margin,
                           witness=verdict.worst_point, verdict=verdict)


# ---------------------------------------------------------------- MGF


def lambda_grid(d: Distribution, negative: bool = False,
                points: int = config.LAMBDA_GRID_POINTS) -> np.ndarray:
    """
    Grade geométrica de λ em [LAMBDA_GRID_START, λ_max]

    λ_max respeita o domínio confiável da MGF no lado pedido e é limitado
    por LAMBDA_GRID_CAP quando esse lado não foi truncado.
    """
    low, high = d.moments.mgf_domain_hint
    bound = -low if negative else high
    lam_max = min(bound, config.LAMBDA_GRID_CAP)
    if lam_max <= config.LAMBDA_GRID_START:
        raise InputValidationError(f"domínio confiável da MGF curto demais (λ_max={lam_max:g})",
                                   field="lambda_grid")
    return np.geomspace(config.LAMBDA_GRID_START, lam_max, points)


def _mgf_tail_conclusion(d: Distribution, k2: float, grid: np.ndarray, sign: float,
                         label: str) -> ConclusionCheck:
    excess = []
    for lam in grid:
        value = mgf_eval(d, sign * lam).value
        excess.append(value * math.exp(-lam * lam * k2 / 2) - 1.0)
    excess = np.array(excess)
    worst = int(np.argmax(excess))
    return ConclusionCheck(
        description=f"M({'-' if sign < 0 else ''}λ) <= exp(λ²k²/2) na cauda {label}",
        worst_violation=float(excess[worst]),
        tolerance=config.EPS_MGF_RELATIVE,
        witness=float(grid[worst]),
    )


def check_mgf_condition(d: Distribution, k2: float, lam_grid=None) -> Certificate:
    """
    Critério M'(λ) <= k²λM(λ) para λ >= 0 e a cota sub-gaussiana resultante

    Args:
        d: Lei centrada
        k2: Constante k²
        lam_grid: Grade de λ (padrão: lambda_grid(d))

    Returns:
        Certificate com margens relativas (M'/M comparado a k²λ)
    """
    _require_centered(d)
    if k2 <= 0:
        raise InputValidationError(f"deve ser positivo, recebido {k2}", field="k2")
    grid = lambda_grid(d) if lam_grid is None else np.asarray(lam_grid, dtype=float)
    if np.any(grid < 0):
        raise InputValidationError("a grade de λ deve ser não negativa", field="lambda_grid")

    margins = []
    for lam in grid:
        m = mgf_eval(d, lam)
        margins.append((k2 * lam * m.value - m.derivative) / m.value)
    margins = np.array(margins)
    worst = int(np.argmin(margins))
    hypothesis = HypothesisCheck(
        name="M'(λ) <= k²λM(λ)",
        holds=bool(margins[worst] >= -config.EPS_MGF_RELATIVE),
        margin=float(margins[worst]),
        witness=float(grid[worst]),
    )
    conclusion = _mgf_tail_conclusion(d, k2, grid, 1.0, "direita")
    hypotheses = [hypothesis]
    return _finish(Certificate(
        claim="mgf",
        hypothesis_checks=hypotheses,
        conclusion_checks=[conclusion],
        verdict=_hypothesis_first(hypotheses, [conclusion]),
        parameters={"k2": k2, "lambda_points": int(grid.size), "lambda_max": float(grid.max())},
    ))


# -------------------------------------------------------- log-concavidade


def check_strong_logconcavity(d: Distribution, k2: float) -> Certificate:
    """log f(x) + x²/(2k²) côncava, por segundas diferenças no interior do suporte"""
    _require_continuous(d, "log-concavidade forte")
    if k2 <= 0:
        raise InputValidationError(f"deve ser positivo, recebido {k2}", field="k2")

    x, f = d.support, d.weights
    positive = _resolved_density(f)
    interior = positive[:-2] & positive[1:-1] & positive[2:]
    with np.errstate(divide="ignore"):
        psi = np.log(np.where(positive, f, 1.0)) + x ** 2 / (2 * k2)
    second = psi[2:] - 2 * psi[1:-1] + psi[:-2]
    second = np.where(interior, second, -np.inf)
    scale = max(1.0, float(np.max(np.abs(psi[positive]))))
    tolerance = config.EPS_CONCAVITY * scale

    worst = int(np.argmax(second))
    peak = float(second[worst])
    hypothesis = HypothesisCheck(
        name="log f + x²/(2k²) côncava",
        holds=bool(peak <= tolerance),
        margin=-peak if math.isfinite(peak) else 0.0,
        witness=float(x[worst + 1]),
    )
    return _finish(Certificate(
        claim="logconcave",
        hypothesis_checks=[hypothesis],
        conclusion_checks=[],
        verdict=_hypothesis_first([hypothesis], []),
        parameters={"k2": k2, "tolerance": tolerance},
    ))


def verify_subgaussian_equivalence(d: Distribution, k2: float) -> Certificate:
    """
    X* ≤_{σ,k} X nas duas caudas e a cota sub-gaussiana correspondente

    A cauda esquerda passa por -X, já que (-X)* = -X*.

    Args:
        d: Lei centrada com variância positiva
        k2: Constante k²

    Returns:
        Certificate com duas dominações ponderadas e duas cotas de MGF
    """
    _require_centered(d)
    sigma2 = d.variance
    transformed = zero_bias(d).output
    right = check_weighted(transformed, d, sigma2, k2)
    left = check_weighted(transformed.reflect(), d.reflect(), sigma2, k2)
    hypotheses = [
        _order_hypothesis("X* ≤_{σ,k} X (cauda direita)", right),
        _order_hypothesis("-X* ≤_{σ,k} -X (cauda esquerda)", left),
    ]
    right_mgf = _mgf_tail_conclusion(d, k2, lambda_grid(d), 1.0, "direita")
    left_mgf = _mgf_tail_conclusion(d, k2, lambda_grid(d, negative=True), -1.0, "esquerda")

    notes = []
    if right.holds:
        notes.append("dominação à direita vale: implica cauda direita sub-gaussiana de constante k²")
    if left.holds:
        notes.append("dominação à esquerda vale: implica cauda esquerda sub-gaussiana de constante k²")

    if (right.holds and not right_mgf.holds) or (left.holds and not left_mgf.holds):
        verdict = CONCLUSION_VIOLATED
    elif not (right.holds and left.holds):
        verdict = HYPOTHESIS_FAILED
    else:
        verdict = _hypothesis_first(hypotheses, [right_mgf, left_mgf])

    conclusions = [right_mgf, left_mgf]
    if verdict == CONCLUSION_VIOLATED:
        # a conclusão decisiva vem primeiro para a testemunha do certificado
        conclusions.sort(key=lambda c: c.holds)
    return _finish(Certificate(
        claim="theorem3",
        hypothesis_checks=hypotheses,
        conclusion_checks=conclusions,
        verdict=verdict,
        parameters={"k2": k2, "sigma2": sigma2},
        notes=notes,
    ))


# ---------------------------------------------------------- kernel


def _as_callable(a_y: Union[float, Callable]) -> Callable:
    if callable(a_y):
        return a_y
    value = float(a_y)
    return lambda x: np.full(np.shape(x), value)


def check_kernel_domination(x: Distribution, y: Distribution, x0: float,
                            a_y: Union[float, Callable]) -> Certificate:
    """
    Dominação P(X* >= x) <= a_Y(x) P(X >= x) a partir da razão f_X/f_Y

    Args:
        x: Lei centrada
        y: Lei de referência centrada com a mesma variância
        x0: Início da região (x0 >= 0)
        a_y: Constante ou função a_Y(x) que limita f_{Y*}/f_Y à direita de x
    """
    _require_centered(x)
    _require_centered(y)
    _require_continuous(x, "dominação por kernel")
    _require_continuous(y, "dominação por kernel")
    if x0 < 0:
        raise InputValidationError(f"deve ser >= 0, recebido {x0}", field="x0")
    if abs(x.variance - y.variance) > config.EPS_VARIANCE_MATCH:
        raise InputValidationError(
            f"variâncias diferentes ({x.variance:.8g} vs {y.variance:.8g})", field="variance"
        )
    bound = _as_callable(a_y)
    tol = config.KERNEL_RATIO_TOLERANCE
    x_star = zero_bias(x).output
    y_star = zero_bias(y).output

    grid = x.support[x.support >= x0]
    resolved = ((x.survival(grid) > config.KERNEL_TAIL_FLOOR)
                & (y.survival(grid) > config.KERNEL_TAIL_FLOOR)
                & (y.density(grid) > 0))
    grid = grid[resolved]
    if grid.size < 2:
        raise InputValidationError("região [x0, ∞) sem nós resolvidos", field="x0")

    fx, fy = x.density(grid), y.density(grid)
    ratio = fx / fy
    increase = ratio[1:] / np.where(ratio[:-1] > 0, ratio[:-1], np.inf) - 1.0
    failing = np.flatnonzero(increase > tol)
    monotone = HypothesisCheck(
        name="f_X/f_Y não crescente em [x0, ∞)",
        holds=failing.size == 0,
        margin=-float(increase.max()),
        witness=float(grid[failing[0] + 1]) if failing.size else None,
    )

    star_ratio = y_star.density(grid) / fy
    suffix_max = np.maximum.accumulate(star_ratio[::-1])[::-1]
    limit = np.asarray(bound(grid), dtype=float)
    excess = suffix_max / limit - 1.0
    worst = int(np.argmax(excess))
    kernel = HypothesisCheck(
        name="f_{Y*}(t)/f_Y(t) <= a_Y(x) para t >= x >= x0",
        holds=bool(excess[worst] <= tol),
        margin=-float(excess[worst]),
        witness=float(grid[worst]),
    )

    region = x.support[x.support >= x0]
    gap = x_star.survival(region) - np.asarray(bound(region), dtype=float) * x.survival(region)
    worst = int(np.argmax(gap))
    conclusion = ConclusionCheck(
        description="P(X* >= x) <= a_Y(x) P(X >= x) para x >= x0",
        worst_violation=float(gap[worst]),
        tolerance=config.EPS_ORDER,
        witness=float(region[worst]),
    )
    hypotheses = [monotone, kernel]
    return _finish(Certificate(
        claim="kernel",
        hypothesis_checks=hypotheses,
        conclusion_checks=[conclusion],
        verdict=_hypothesis_first(hypotheses, [conclusion]),
        parameters={"x0": x0, "variance": x.variance, "resolved_nodes": int(grid.size)},
    ))


# ------------------------------------------------------------- φ'


def _gaussian_reference(d: Distribution) -> Distribution:
    """N(0, σ²) quadraturada na própria grade da lei"""
    pdf = stats.norm.pdf(d.support, scale=d.std)
    return Distribution(CONTINUOUS, d.support, pdf, label=f"N(0,{d.variance:.6g})")


def check_phi_prime(d: Distribution, x_l: float, x_r: float) -> Certificate:
    """
    φ'(x) >= x/σ² para x >= x_r e φ'(x) <= x/σ² para x <= x_l, onde f = e^{-φ}

    A conclusão é f_{X*} <= f_X nas duas regiões externas. Também registra as
    constantes K(x_r), K(x_l) da comparação com a gaussiana de mesma
    variância e, quando E[X³] = 0, o adendo de ordem convexa X* ≤_cx X.
    """
    _require_continuous(d, "o critério de φ'")
    _require_centered(d)
    if not x_l < 0 < x_r:
        raise InputValidationError(f"exige x_l < 0 < x_r, recebido ({x_l}, {x_r})", field="x_l")
    x, f = d.support, d.weights
    a, b = d.hull
    if not (a < x_l and x_r < b):
        raise InputValidationError("x_l e x_r devem estar no interior do suporte", field="x_r")
    inner = (x > x_l) & (x < x_r)
    if np.any(f[inner] <= 0):
        raise InputValidationError("densidade nula dentro de (x_l, x_r)", field="weights")

    sigma2 = d.variance
    h = d.grid_spacing
    tolerance = max(config.PHI_PRIME_TOLERANCE_FLOOR, config.PHI_PRIME_TOLERANCE_SCALE * h * h)
    positive = _resolved_density(f)
    usable = np.zeros_like(positive)
    usable[1:-1] = positive[:-2] & positive[1:-1] & positive[2:]
    with np.errstate(divide="ignore"):
        phi = -np.log(np.where(positive, f, 1.0))
    phi_prime = np.full_like(x, np.nan)
    phi_prime[1:-1] = (phi[2:] - phi[:-2]) / (2 * h)

    hypotheses = []
    for side, region, gap in (
        ("direita", usable & (x >= x_r), x / sigma2 - phi_prime),
        ("esquerda", usable & (x <= x_l), phi_prime - x / sigma2),
    ):
        values = gap[region]
        if values.size == 0:
            hypotheses.append(HypothesisCheck(name=f"φ' vs x/σ² ({side})", holds=True, margin=0.0))
            continue
        worst = int(np.argmax(values))
        hypotheses.append(HypothesisCheck(
            name=f"φ' vs x/σ² ({side})",
            holds=bool(values[worst] <= tolerance),
            margin=-float(values[worst]),
            witness=float(x[region][worst]),
        ))

    transformed = zero_bias(d).output
    f_star = transformed.density(x)
    outer = (x >= x_r) | (x <= x_l)
    excess = np.where(outer, f_star - f, -np.inf)
    worst = int(np.argmax(excess))
    conclusions = [ConclusionCheck(
        description="f_{X*} <= f_X em (-∞, x_l] ∪ [x_r, ∞)",
        worst_violation=float(excess[worst]),
        tolerance=config.EPS_ORDER,
        witness=float(x[worst]),
    )]

    gauss = _gaussian_reference(d)
    constants = {}
    for name, point, tail in (("K(x_r)", x_r, "right"), ("K(x_l)", x_l, "left")):
        constant = float(gauss.density(point) / d.density(point))
        constants[name] = constant
        if tail == "right":
            region = x[x >= point]
            gap = d.survival(region) - gauss.survival(region) / constant
            description = "P(X >= x) <= P(G >= x)/K(x_r) para x >= x_r"
        else:
            region = x[x <= point]
            gap = d.cdf(region) - gauss.cdf(region) / constant
            description = "P(X <= x) <= P(G <= x)/K(x_l) para x <= x_l"
        worst = int(np.argmax(gap))
        conclusions.append(ConclusionCheck(
            description=description,
            worst_violation=float(gap[worst]),
            tolerance=config.EPS_ORDER,
            witness=float(region[worst]),
        ))

    details: Dict[str, Any] = {"comparison_constants": constants}
    third = d.moments.third_central_moment
    inside_ok = bool(np.all(f[inner] <= f_star[inner] + config.EPS_ORDER))
    if abs(third) <= config.EPS_CENTERED and inside_ok:
        convex = check_convex(transformed, d)
        signs = sign_sequence(d, transformed)
        details["convex_addendum"] = {
            "convex_order": convex.to_dict(),
            "sign_sequence": signs.to_dict(),
        }
    else:
        details["convex_addendum"] = None

    return _finish(Certificate(
        claim="phi-prime",
        hypothesis_checks=hypotheses,
        conclusion_checks=conclusions,
        verdict=_hypothesis_first(hypotheses, conclusions),
        parameters={"x_l": x_l, "x_r": x_r, "sigma2": sigma2, "tolerance": tolerance},
        details=details,
    ))


# ---------------------------------------------------------- deslocamento


def _require_size_biasable(d: Distribution) -> None:
    if np.any((d.support < 0) & (d.weights > 0)):
        raise InputValidationError("suporte com massa em valores negativos", field="support")
    if d.mean <= 0:
        raise InputValidationError(f"média deve ser positiva, recebido {d.mean:g}", field="mean")


def _atom_spacing(d: Distribution) -> Optional[float]:
    atoms = d.support[d.weights > 0]
    if atoms.size < 2:
        return None
    gaps = np.diff(atoms)
    step = float(gaps.min())
    ratios = gaps / step
    if np.any(np.abs(ratios - np.round(ratios)) > 1e-9):
        raise InputValidationError("átomos fora de reticulado: deslocamento indefinido", field="support")
    return step


def _aligned_shift(d: Distribution, c: float) -> None:
    step = _atom_spacing(d)
    if step is None or c == 0:
        return
    multiple = c / step
    if abs(multiple - round(multiple)) > 1e-9:
        raise InputValidationError(f"c={c:g} não é múltiplo do espaçamento {step:g}", field="c")


def _shift_hypothesis(d: Distribution, c: float, start: float) -> HypothesisCheck:
    name = "(x/μ) f(x) <= f(x - c)"
    if d.is_continuous:
        nodes = d.support[d.support >= start]
        lhs = nodes / d.mean * d.weights[d.support >= start]
        rhs = d.density(nodes - c)
    else:
        keep = (d.weights > 0) & (d.support >= start)
        nodes = d.support[keep]
        lhs = nodes / d.mean * d.weights[keep]
        shifted = nodes - c
        index = np.clip(np.searchsorted(d.support, shifted), 0, d.support.size - 1)
        hit = np.abs(d.support[index] - shifted) <= 1e-9 * max(1.0, abs(c))
        rhs = np.where(hit, d.weights[index], 0.0)
    if nodes.size == 0:
        return HypothesisCheck(name=name, holds=True, margin=0.0)
    allowed = rhs * (1 + config.SHIFT_RELATIVE_TOLERANCE) + config.SHIFT_ABSOLUTE_TOLERANCE
    failing = np.flatnonzero(lhs > allowed)
    return HypothesisCheck(
        name=name,
        holds=failing.size == 0,
        margin=float(np.min(rhs - lhs)),
        witness=float(nodes[failing[0]]) if failing.size else None,
    )


def check_density_shift(d: Distribution, c: float, t0: float) -> Certificate:
    """
    Condição de deslocamento (x/μ) f(x) <= f(x - c) e a dominação X^s ≤_st X + c

    Abaixo de min(suporte) + c vale P(X >= t - c) = 1 e a conclusão é
    automática, por isso a hipótese começa em max(t0, min(suporte) + c).

    Args:
        d: Lei com suporte não negativo e média positiva
        c: Deslocamento (múltiplo do espaçamento dos átomos, se discreta)
        t0: Início da região

    Returns:
        Certificate; a conclusão decide o veredito antes da hipótese
    """
    _require_size_biasable(d)
    if c < 0:
        raise InputValidationError(f"deve ser >= 0, recebido {c}", field="c")
    if not d.is_continuous:
        _aligned_shift(d, c)

    start = max(t0, d.hull[0] + c)
    hypothesis = _shift_hypothesis(d, c, start)

    biased = size_bias(d).output
    shifted = d.shift(c)
    domination = check_st(biased, shifted, t_min=t0)
    conclusions = [ConclusionCheck(
        description="P(X^s >= t) <= P(X >= t - c) para t >= t0",
        worst_violation=-domination.margin,
        tolerance=config.EPS_ORDER,
        witness=domination.worst_point,
    )]

    grid = np.union1d(d.support, shifted.support)
    grid = grid[(grid > 0) & (grid >= t0)]
    if grid.size:
        gap = d.survival(grid) - d.mean / grid * shifted.survival(grid)
        worst = int(np.argmax(gap))
        conclusions.append(ConclusionCheck(
            description="P(X >= t) <= (μ/t) P(X >= t - c) para t > 0",
            worst_violation=float(gap[worst]),
            tolerance=config.EPS_ORDER,
            witness=float(grid[worst]),
        ))

    if not all(check.holds for check in conclusions):
        verdict = CONCLUSION_VIOLATED
    elif not hypothesis.holds:
        verdict = HYPOTHESIS_FAILED
    else:
        verdict = VERIFIED
    return _finish(Certificate(
        claim="shift",
        hypothesis_checks=[hypothesis],
        conclusion_checks=conclusions,
        verdict=verdict,
        parameters={"c": c, "t0": t0, "mu": d.mean, "hypothesis_start": start},
    ))


def find_min_shift(d: Distribution, t0: float) -> Optional[float]:
    """
    Menor c cujo certificado de deslocamento é verificado na grade

    Bissecção em [0, largura do suporte] até o espaçamento da grade para leis
    contínuas; varredura dos múltiplos do espaçamento dos átomos para discretas.

    Returns:
        c encontrado, ou None quando nem o maior deslocamento verifica
    """
    _require_size_biasable(d)
    a, b = d.hull
    width = b - a

    def verified(c: float) -> bool:
        return check_density_shift(d, c, t0).verified

    if verified(0.0):
        return 0.0
    if d.is_continuous:
        if not verified(width):
            logger.warning(f"⚠️ nenhum deslocamento em [0, {width:g}] verifica '{d.label}'")
            return None
        low, high = 0.0, width
        while high - low > d.grid_spacing:
            middle = 0.5 * (low + high)
            if verified(middle):
                high = middle
            else:
                low = middle
        return high

    step = _atom_spacing(d)
    if step is None:
        return None
    # no reticulado a condição não é monótona em c (o nó x = min + c compara
    # com a massa do primeiro átomo): varredura crescente dos múltiplos
    for multiple in range(1, int(round(width / step)) + 1):
        if verified(multiple * step):
            return multiple * step
    logger.warning(f"⚠️ nenhum múltiplo de {step:g} até {width:g} verifica '{d.label}'")
    return None
