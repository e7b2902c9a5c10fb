"""
Exportador de resultados para JSON e CSV
"""

import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
import pandas as pd

from config import OUTPUT_ENCODING
from distribution_factory import distribution_to_spec
from experiment_report import report_frame
from transforms import TransformResult

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def to_jsonable(value: Any) -> Any:
    """Converte tipos numpy para Python e floats não finitos para None"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def atomic_write(path: PathLike, text: str) -> str:
    """Grava em arquivo temporário no diretório de destino e renomeia"""
    output_path = Path(path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    handle, temp_name = tempfile.mkstemp(dir=output_path.parent, prefix=f".{output_path.name}.", suffix=".tmp")
    try:
        with os.fdopen(handle, "w", encoding=OUTPUT_ENCODING, newline="") as f:
            f.write(text)
        os.replace(temp_name, output_path)
    except BaseException:
        Path(temp_name).unlink(missing_ok=True)
        raise
    return str(output_path)


def dumps(payload: Any) -> str:
    """JSON determinístico: chaves ordenadas, floats com precisão total"""
    return json.dumps(to_jsonable(payload), indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"


class ReportExporter:
    """Grava distribuições, veredictos, certificados, curvas e relatórios"""

    @staticmethod
    def write_json(payload: Any, path: PathLike) -> str:
        written = atomic_write(path, dumps(payload))
        logger.info(f"📁 JSON exportado: {written}")
        return written

    @staticmethod
    def write_frame(frame: pd.DataFrame, path: PathLike) -> str:
        written = atomic_write(path, frame.to_csv(index=False, float_format="%.17g"))
        logger.info(f"📁 CSV exportado: {written} ({len(frame)} linhas, colunas: {', '.join(frame.columns)})")
        return written

    @staticmethod
    def transform_payload(result: TransformResult) -> Dict[str, Any]:
        """Schema de distribuição (relido por load_distribution) mais o diagnóstico"""
        payload = distribution_to_spec(result.output)
        payload["diagnostics"] = {
            "transform": result.kind,
            "input": result.input_ref,
            "mass_defect": result.mass_defect,
            "hull": list(result.hull),
            "warnings": list(result.warnings),
            **result.diagnostics,
        }
        return payload

    @staticmethod
    def export_transform(result: TransformResult, path: PathLike, fmt: str = "json") -> str:
        if fmt == "csv":
            output = result.output
            column = "density" if output.is_continuous else "p"
            return ReportExporter.write_frame(pd.DataFrame({"x": output.support, column: output.weights}), path)
        return ReportExporter.write_json(ReportExporter.transform_payload(result), path)

    @staticmethod
    def export_result(result: Any, path: PathLike, fmt: str = "json") -> str:
        """OrderVerdict, Certificate ou qualquer objeto com to_dict()"""
        payload = result.to_dict()
        if fmt == "csv":
            flat = pd.json_normalize(to_jsonable(payload), sep=".")
            return ReportExporter.write_frame(flat, path)
        return ReportExporter.write_json(payload, path)

    @staticmethod
    def export_curve(frame: pd.DataFrame, path: PathLike, fmt: str = "csv") -> str:
        if fmt == "json":
            return ReportExporter.write_json({name: frame[name].tolist() for name in frame.columns}, path)
        return ReportExporter.write_frame(frame, path)

    @staticmethod
    def export_report(payload: Dict[str, Any], path: PathLike, fmt: str = "json") -> Dict[str, str]:
        """
        Grava o relatório e a tabela companheira (t, empírico, banda, cotas)

        Args:
            payload: ExperimentReport.to_dict() (possivelmente vindo do cache)
            path: Destino principal
            fmt: 'json' grava relatório + CSV ao lado; 'csv' grava só a tabela

        Returns:
            Caminhos gravados por tipo
        """
        path = Path(path)
        frame = report_frame(payload)
        if fmt == "csv":
            return {"csv": ReportExporter.write_frame(frame, path)}
        written = {"json": ReportExporter.write_json(payload, path)}
        written["csv"] = ReportExporter.write_frame(frame, path.with_suffix(".csv"))
        return written


def export_to_stdout(payload: Any, stream=None) -> None:
    """Dados sem --out vão para a saída padrão; o log fica no stderr"""
    (stream or sys.stdout).write(dumps(payload))
