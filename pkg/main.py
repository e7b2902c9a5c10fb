"""
Linha de comando `stein`: transformadas, ordens, cotas, certificados e simulações
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

import config
from bound_calculator import (
    BerryEsseenInput,
    REQUIRED_CONSTANTS,
    aggregate_K2,
    berry_esseen_bound,
    bound_curve,
    specialize_K2,
    tail_bound,
)
from cache_manager import CacheManager
from certificate_verifier import (
    check_density_shift,
    check_kernel_domination,
    check_mgf_condition,
    check_phi_prime,
    check_strong_logconcavity,
    find_min_shift,
    verify_subgaussian_equivalence,
)
from distribution_factory import build_distribution, load_distribution, load_joint, load_spec
from exceptions import InputValidationError, SteinError
from hoeffding_simulator import LIPSCHITZ_FUNCTIONS, HoeffdingConfig, simulate_hoeffding
from order_checker import check_convex, check_st, check_weighted, sign_sequence
from report_exporter import ReportExporter, export_to_stdout
from size_bias_coupling import SumCouplingConfig, estimate_D_psi, verify_coupling_bound
from transforms import directional_zero_bias, size_bias, stein_identity_battery, zero_bias

logger = logging.getLogger(__name__)

TRANSFORMS = {"zero-bias": zero_bias, "size-bias": size_bias}
ORDER_CHECKS = ("st", "weighted", "convex", "sign-sequence")
TAIL_KINDS = {
    "subgaussian": "subgaussian",
    "subgamma": "subgamma",
    "gamma-function": "gamma_function",
    "chatterjee": "chatterjee",
    "goldstein": "goldstein",
    "hoeffding-stat": "hoeffding_stat",
    "hoeffding-lipschitz": "hoeffding_lipschitz",
}
BERRY_ESSEEN_FLAGS = {
    "zero-bias-BE": "zero_bias",
    "size-bias-D-BE": "size_bias_D",
    "size-bias-psi-BE": "size_bias_psi",
}
CLAIMS = ("mgf", "logconcave", "theorem3", "kernel", "phi-prime", "shift", "min-shift")
SIMULATIONS = ("hoeffding", "sum-coupling", "d-psi")


class SteinArgumentParser(argparse.ArgumentParser):
    """Erros de uso viram InputValidationError (código 1) em vez de sair com 2"""

    def error(self, message):
        raise InputValidationError(message, field="argv")


def parse_t_grid(text: str) -> np.ndarray:
    """'a:b:passo' -> a, a+passo, ..., b (inclusive)"""
    try:
        start, stop, step = (float(part) for part in text.split(":"))
    except ValueError as e:
        raise InputValidationError(f"esperado a:b:passo, recebido '{text}'", field="--t-grid") from e
    if step <= 0 or stop < start or start < 0:
        raise InputValidationError(f"grade inválida '{text}'", field="--t-grid")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def load_matrix(path: str) -> np.ndarray:
    """CSV numérico retangular, sem cabeçalho"""
    try:
        frame = pd.read_csv(path, header=None)
        return frame.to_numpy(dtype=float)
    except FileNotFoundError as e:
        raise InputValidationError(f"arquivo não encontrado: {path}", field="--matrix") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError, ValueError) as e:
        raise InputValidationError(f"CSV malformado: {e}", field="--matrix") from e


def load_components(path: str):
    """Lista de especificações ou {"components": [...], "shifts": [...]}"""
    payload = load_spec(path)
    shifts = None
    if isinstance(payload, dict):
        shifts = payload.get("shifts")
        payload = payload.get("components")
    if not isinstance(payload, list):
        raise InputValidationError("esperada lista de componentes", field="--components")
    return [build_distribution(spec) for spec in payload], shifts


def _common_flags() -> argparse.ArgumentParser:
    common = SteinArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="semente raiz (obrigatória para simulações)")
    common.add_argument("--out", help="arquivo de saída")
    common.add_argument("--format", choices=["json", "csv"], help="formato da saída (padrão pela extensão)")
    common.add_argument("--log-level", default=config.LOG_LEVEL,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    common.add_argument("--no-cache", action="store_true", help="ignora o cache de relatórios")
    return common


def build_parser() -> SteinArgumentParser:
    common = _common_flags()
    parser = SteinArgumentParser(prog="stein", description="Toolkit de transformadas de Stein")
    commands = parser.add_subparsers(dest="command", required=True)

    transform = commands.add_parser("transform", parents=[common], help="zero-bias, size-bias ou direcional")
    transform.add_argument("--kind", required=True, choices=[*TRANSFORMS, "directional"])
    transform.add_argument("--spec", required=True)
    transform.add_argument("--direction", choices=["first", "second"], default="first")

    order = commands.add_parser("order-check", parents=[common], help="ordens estocásticas")
    order.add_argument("--kind", required=True, choices=ORDER_CHECKS)
    order.add_argument("--x", required=True)
    order.add_argument("--y", required=True)
    order.add_argument("--sigma2", type=float)
    order.add_argument("--k2", type=float)

    bound = commands.add_parser("bound", parents=[common], help="cotas de cauda, Berry-Esseen e K²")
    bound.add_argument("--kind", required=True, choices=[*TAIL_KINDS, *BERRY_ESSEEN_FLAGS, "k2"])
    for flag in ("--k2", "--c", "--mu", "--ey", "--var-y", "--sum-c2", "--lipschitz",
                 "--sigma2", "--A", "--D", "--psi", "--delta", "--t"):
        bound.add_argument(flag, type=float)
    bound.add_argument("--t-grid")
    bound.add_argument("--params", help="JSON com os parâmetros de K²")

    verify = commands.add_parser("verify", parents=[common], help="certificados dos resultados")
    verify.add_argument("--claim", required=True, choices=CLAIMS)
    verify.add_argument("--spec")
    verify.add_argument("--y", help="lei de referência (kernel)")
    verify.add_argument("--k2", type=float)
    verify.add_argument("--x0", type=float, default=0.0)
    verify.add_argument("--a-y", type=float)
    verify.add_argument("--x-l", type=float)
    verify.add_argument("--x-r", type=float)
    verify.add_argument("--c", type=float)
    verify.add_argument("--t0", type=float, default=0.0)

    simulate = commands.add_parser("simulate", help="experimentos de Monte Carlo")
    experiments = simulate.add_subparsers(dest="experiment", required=True)
    hoeffding = experiments.add_parser("hoeffding", parents=[common])
    hoeffding.add_argument("--matrix", required=True)
    hoeffding.add_argument("--samples", type=int, required=True)
    hoeffding.add_argument("--t-grid")
    hoeffding.add_argument("--function", choices=sorted(LIPSCHITZ_FUNCTIONS))
    hoeffding.add_argument("--lipschitz", type=float)
    for name in ("sum-coupling", "d-psi"):
        experiment = experiments.add_parser(name, parents=[common])
        experiment.add_argument("--components", required=True)
        experiment.add_argument("--samples", type=int, required=True)
        experiment.add_argument("--t-grid")
        if name == "d-psi":
            experiment.add_argument("--mode", choices=["auto", "exact", "sampling"], default="auto")

    cache = commands.add_parser("cache", parents=[common], help="cache de relatórios")
    cache.add_argument("action", choices=["info", "clear", "clear-expired"])
    return parser


def setup_logging(level: str) -> None:
    """Log em config.LOG_FILE, aberto só na primeira mensagem, e na saída de erro"""
    Path(config.LOG_FILE).parent.mkdir(parents=True, exist_ok=True)
    logging.basicConfig(
        level=getattr(logging, level),
        format=config.LOG_FORMAT,
        handlers=[
            logging.FileHandler(config.LOG_FILE, encoding="utf-8", delay=True),
            logging.StreamHandler(sys.stderr),
        ],
        force=True,
    )


def _require(args: argparse.Namespace, *names: str) -> None:
    for name in names:
        if getattr(args, name) is None:
            raise InputValidationError("flag obrigatória ausente", field=f"--{name.replace('_', '-')}")


class SteinApp:
    """Despacha cada subcomando e decide o código de saída"""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.exporter = ReportExporter()
        self._cache_manager: Optional[CacheManager] = None

    @property
    def cache_manager(self) -> Optional[CacheManager]:
        """Criado na primeira consulta; comandos sem cache não tocam o disco"""
        if self._cache_manager is None and config.CACHE_ENABLED and not getattr(self.args, "no_cache", False):
            self._cache_manager = CacheManager(cache_dir=config.CACHE_DIR)
        return self._cache_manager

    @property
    def fmt(self) -> str:
        if self.args.format:
            return self.args.format
        return "csv" if self.args.out and Path(self.args.out).suffix == ".csv" else "json"

    def _emit(self, result: Any, default_name: Optional[str] = None) -> None:
        out = self.args.out or default_name
        if out:
            self.exporter.export_result(result, out, self.fmt)
        else:
            export_to_stdout(result.to_dict())

    # ------------------------------------------------------------ subcomandos

    def transform(self) -> int:
        args = self.args
        if args.kind == "directional":
            result = directional_zero_bias(load_joint(args.spec), args.direction)
        else:
            d = load_distribution(args.spec)
            result = TRANSFORMS[args.kind](d)
            if args.kind == "zero-bias":
                result.diagnostics["stein_identity_gaps"] = stein_identity_battery(d, result)
        for warning in result.warnings:
            logger.warning(f"⚠️ {warning}")
        out = args.out or config.DEFAULT_TRANSFORM_FILENAME
        self.exporter.export_transform(result, out, self.fmt)
        logger.info(f"✅ transformada {result.kind} de '{result.input_ref}' gravada em {out}")
        return config.EXIT_OK

    def order_check(self) -> int:
        args = self.args
        x, y = load_distribution(args.x), load_distribution(args.y)
        if args.kind == "st":
            verdict = check_st(x, y)
        elif args.kind == "weighted":
            _require(args, "sigma2", "k2")
            verdict = check_weighted(y, x, args.sigma2, args.k2)
        elif args.kind == "convex":
            verdict = check_convex(x, y)
        else:
            verdict = sign_sequence(x, y)
        self._emit(verdict)
        return config.EXIT_OK if verdict.holds else config.EXIT_CHECK_FAILED

    def _constants(self) -> Dict[str, float]:
        args = self.args
        names = ("k2", "c", "mu", "ey", "var_y", "sum_c2", "lipschitz")
        return {name: getattr(args, name) for name in names if getattr(args, name) is not None}

    def _write_scalar(self, payload: Dict[str, Any]) -> None:
        if self.args.out:
            self.exporter.write_json(payload, self.args.out)
        else:
            print(f"{payload['value']:.17g}")

    def bound(self) -> int:
        args = self.args
        if args.kind == "k2":
            _require(args, "params")
            params = load_spec(args.params)
            kind = params.pop("kind", "aggregate")
            if kind == "aggregate":
                try:
                    value = aggregate_K2(params["sigma"], params["k"])
                except KeyError as e:
                    raise InputValidationError("parâmetro obrigatório para 'aggregate'", field=e.args[0]) from e
            else:
                value = specialize_K2(kind, params)
            self._write_scalar({"kind": "k2", "structure": kind, "value": value})
            return config.EXIT_OK

        if args.kind in BERRY_ESSEEN_FLAGS:
            kind = BERRY_ESSEEN_FLAGS[args.kind]
            sigma2 = args.sigma2
            if sigma2 is None and kind == "zero_bias":
                sigma2 = 1.0
            data = BerryEsseenInput(sigma2=sigma2, mu=args.mu, A=args.A, D=args.D,
                                    Psi=args.psi, delta=args.delta)
            self._write_scalar({"kind": kind, "value": berry_esseen_bound(kind, data)})
            return config.EXIT_OK

        kind = TAIL_KINDS[args.kind]
        constants = {name: value for name, value in self._constants().items()
                     if name in REQUIRED_CONSTANTS[kind]}
        if args.t is not None:
            self._write_scalar({"kind": kind, "t": args.t, "value": tail_bound(kind, constants, args.t)})
            return config.EXIT_OK
        _require(args, "t_grid")
        frame = bound_curve(kind, constants).to_frame(parse_t_grid(args.t_grid))
        if args.out:
            self.exporter.export_curve(frame, args.out, self.fmt)
        else:
            sys.stdout.write(frame.to_csv(index=False, float_format="%.17g"))
        return config.EXIT_OK

    def verify(self) -> int:
        args = self.args
        _require(args, "spec")
        d = load_distribution(args.spec)
        claim = args.claim
        if claim == "min-shift":
            c = find_min_shift(d, args.t0)
            payload = {"claim": "min-shift", "t0": args.t0, "c": c,
                       "certificate": check_density_shift(d, c, args.t0).to_dict() if c is not None else None}
            self.exporter.write_json(payload, args.out or config.DEFAULT_CERTIFICATE_FILENAME)
            if c is None:
                logger.info(f"❌ nenhum deslocamento certificado para '{d.label}'")
                return config.EXIT_CHECK_FAILED
            logger.info(f"✅ menor deslocamento certificado: c = {c:g}")
            return config.EXIT_OK

        if claim in ("mgf", "logconcave", "theorem3"):
            _require(args, "k2")
            certify = {"mgf": check_mgf_condition, "logconcave": check_strong_logconcavity,
                       "theorem3": verify_subgaussian_equivalence}[claim]
            certificate = certify(d, args.k2)
        elif claim == "kernel":
            _require(args, "y", "a_y")
            certificate = check_kernel_domination(d, load_distribution(args.y), args.x0, args.a_y)
        elif claim == "phi-prime":
            _require(args, "x_l", "x_r")
            certificate = check_phi_prime(d, args.x_l, args.x_r)
        else:
            _require(args, "c")
            certificate = check_density_shift(d, args.c, args.t0)
        self._emit(certificate, config.DEFAULT_CERTIFICATE_FILENAME)
        return config.EXIT_OK if certificate.verified else config.EXIT_CHECK_FAILED

    def simulate(self) -> int:
        args = self.args
        _require(args, "seed")
        t_grid = parse_t_grid(args.t_grid) if args.t_grid else None
        if args.experiment == "hoeffding":
            cfg = HoeffdingConfig(matrix=load_matrix(args.matrix), n_samples=args.samples, seed=args.seed,
                                  t_grid=t_grid, lipschitz_function=args.function, lipschitz=args.lipschitz)
            key, compute = cfg.cache_key(), lambda: simulate_hoeffding(cfg).to_dict()
        else:
            components, shifts = load_components(args.components)
            cfg = SumCouplingConfig(components=components, n_samples=args.samples, seed=args.seed,
                                    shifts=shifts, t_grid=t_grid)
            if args.experiment == "sum-coupling":
                key, compute = cfg.cache_key("coupling"), lambda: verify_coupling_bound(cfg).to_dict()
            else:
                estimate = estimate_D_psi(cfg, args.mode)
                self._emit(estimate, config.DEFAULT_REPORT_FILENAME)
                return config.EXIT_OK

        payload = self.cache_manager.get_cached_report(key) if self.cache_manager else None
        if payload is None:
            payload = compute()
            if self.cache_manager:
                self.cache_manager.save_report(key, payload)
        out = args.out or config.DEFAULT_REPORT_FILENAME
        written = self.exporter.export_report(payload, out, self.fmt)
        for kind, path in written.items():
            logger.info(f"📁 {kind.upper()}: {path}")
        if payload["exploratory"]:
            logger.warning("⚠️ amostra pequena: relatório exploratório")
        return config.EXIT_OK if payload["passed"] else config.EXIT_CHECK_FAILED

    def cache(self) -> int:
        manager = CacheManager(cache_dir=config.CACHE_DIR)
        if self.args.action == "info":
            info = manager.get_cache_info()
            logger.info(f"📁 Diretório: {info['cache_dir']}")
            logger.info(f"📊 Total de arquivos: {info['total_files']} ({info['valid_files']} válidos)")
            logger.info(f"💾 Tamanho total: {info['total_size_mb']} MB")
            export_to_stdout(info)
        elif self.args.action == "clear":
            manager.clear_cache()
        else:
            manager.clear_expired_cache()
        return config.EXIT_OK

    def run(self) -> int:
        handlers = {
            "transform": self.transform,
            "order-check": self.order_check,
            "bound": self.bound,
            "verify": self.verify,
            "simulate": self.simulate,
            "cache": self.cache,
        }
        return handlers[self.args.command]()


def run(argv: Optional[List[str]] = None) -> int:
    """
    Executa um comando `stein`

    Args:
        argv: Argumentos sem o nome do programa (padrão: sys.argv[1:])

    Returns:
        0 sucesso/verificado, 2 verificação executada e reprovada, 1 erro de uso ou entrada
    """
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
    except InputValidationError as e:
        setup_logging(config.LOG_LEVEL)
        logger.error(f"❌ {e}")
        return config.EXIT_ERROR
    except SystemExit as e:
        # --help
        return e.code if isinstance(e.code, int) else config.EXIT_ERROR

    setup_logging(getattr(args, "log_level", config.LOG_LEVEL))
    try:
        return SteinApp(args).run()
    except SteinError as e:
        logger.error(f"❌ {e}")
    except (OSError, json.JSONDecodeError, pd.errors.ParserError) as e:
        logger.error(f"❌ erro de entrada/saída: {e}")
    except Exception as e:
        logger.exception(f"❌ erro inesperado: {e}")
    return config.EXIT_ERROR


def main():
    """Função principal"""
    return run()


if __name__ == "__main__":
    exit(main())
