"""
Configurações do toolkit de transformadas de Stein
"""

import math
import os

# Tolerâncias numéricas
EPS_MASS = 1e-9  # massa total após normalização
EPS_ORDER = 1e-7  # folga das verificações de ordem estocástica
EPS_MGF_RELATIVE = 1e-6  # folga relativa do critério M'(λ) <= k²λM(λ)
EPS_TRANSFORM_DEFECT = 1e-6  # defeito de massa aceito antes de renormalizar
EPS_CDF_CHECK = 1e-6  # conferência da CDF do zero-bias pela fórmula fechada
EPS_CENTERED = 1e-8  # |média| máxima para uma lei considerada centrada
EPS_VARIANCE_MATCH = 1e-6  # variâncias iguais na dominação por kernel
EPS_MARGINAL = 1e-8  # marginais da lei conjunta contra o cache
EPS_TIE = 1e-12  # empate na escolha do ponto de pior violação
EPS_CONCAVITY = 1e-8  # segundas diferenças do log-densidade (multiplicado pela escala)
LOG_DENSITY_FLOOR = 1e-250  # nós com f < pico·piso ficam fora das diferenças de log f
EPS_SIGN = 1e-9  # diferenças de densidade ignoradas no teste de sinais
EPS_COUPLING = 1e-9  # folga de Y^s <= Y + max c_i por sorteio

# Grade padrão
DEFAULT_GRID_POINTS = 4001
TAIL_QUANTILE = 1e-12  # truncamento das leis com suporte ilimitado

# Grade de λ para as verificações de MGF
LAMBDA_GRID_POINTS = 41
LAMBDA_GRID_START = 1e-3
LAMBDA_GRID_CAP = 10.0  # teto para leis sem truncamento
MGF_TRUNCATION_TOLERANCE = 1e-6  # erro relativo de truncamento aceito

# Verificadores
SHIFT_RELATIVE_TOLERANCE = 1e-9  # comparação relativa de (x/μ)f(x) com f(x-c)
SHIFT_ABSOLUTE_TOLERANCE = 1e-15
KERNEL_RATIO_TOLERANCE = 1e-6  # razões de densidade no teste de kernel
KERNEL_TAIL_FLOOR = 1e-9  # razões só onde as duas caudas superam este valor
PHI_PRIME_TOLERANCE_SCALE = 1e-2  # tolerância de φ' = escala * h²
PHI_PRIME_TOLERANCE_FLOOR = 1e-9

# Constante de Berry-Esseen do zero-bias (nunca o arredondado 2.03)
BERRY_ESSEEN_ZERO_BIAS_CONSTANT = 1 + 1 / math.sqrt(2 * math.pi) + math.sqrt(2 * math.pi) / 4

# Monte Carlo
DKW_CONFIDENCE = 0.99  # bandas dos relatórios
DKW_VALIDATION_CONFIDENCE = 0.999  # validações distribucionais
BAND_RESOLUTION_FACTOR = 2.0  # abaixo de fator * ε_DKW a banda não certifica nada
REPLICATE_BATCH = 10_000  # réplicas por semente derivada
MAX_WORKERS = 1  # threads para os lotes de réplicas
MIN_REPORT_SAMPLES = 10_000  # abaixo disso o relatório é apenas exploratório
EXACT_ENUMERATION_LIMIT = 1_000_000  # combinações para o modo exato de D e Ψ
VARIANCE_CI_CONFIDENCE = 0.99
BATCH_MEANS_CONFIDENCE = 0.95
BATCH_MEANS_GROUPS = 20  # grupos do intervalo t de Student para D e Ψ amostrais

# Bateria de funções teste da identidade de Stein
STEIN_TEST_FUNCTIONS = ("x", "x2", "sin", "exp_clipped")

# Funções de Lipschitz registradas para a desigualdade de Hoeffding (constante L)
LIPSCHITZ_CONSTANTS = {
    "sum": 1.0,
    "max": 1.0,
    "norm": 1.0,
}

# Configurações de saída
OUTPUT_ENCODING = "utf-8"
DEFAULT_REPORT_FILENAME = "report.json"
DEFAULT_TRANSFORM_FILENAME = "transformed.json"
DEFAULT_CERTIFICATE_FILENAME = "cert.json"

# Pasta de estado: log e cache ficam abaixo dela
STATE_DIR = "."

# Configurações de log
LOG_FILE = os.path.join(STATE_DIR, "stein.log")
LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
LOG_LEVEL = "INFO"

# Configurações de cache
CACHE_ENABLED = True
CACHE_DIR = os.path.join(STATE_DIR, "cache")
CACHE_TTL_HOURS = 24 * 7  # relatórios são determinísticos; o TTL só limita o disco

# Códigos de saída da linha de comando
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CHECK_FAILED = 2
