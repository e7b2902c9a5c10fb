"""
Cache em disco dos relatórios de Monte Carlo

Cada entrada guarda o to_dict() de um ExperimentReport sob a chave derivada
da configuração (matriz ou componentes, semente, amostras, grade de t).
"""

import json
import logging
from datetime import datetime, timedelta
from pathlib import Path
from typing import Any, Dict, Iterator, Optional, Tuple

from config import CACHE_DIR, CACHE_TTL_HOURS
from report_exporter import atomic_write, dumps

logger = logging.getLogger(__name__)


class CacheManager:
    """Relatórios determinísticos reaproveitados entre execuções idênticas"""

    def __init__(self, cache_dir: str = CACHE_DIR, default_ttl_hours: float = CACHE_TTL_HOURS):
        """
        Args:
            cache_dir: Pasta dos arquivos <chave>.json
            default_ttl_hours: Validade das entradas novas
        """
        self.cache_dir = Path(cache_dir)
        self.default_ttl_hours = default_ttl_hours
        try:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            logger.error(f"❌ pasta de cache indisponível ({self.cache_dir}): {e}")
            raise

    def _entry_path(self, cache_key: str) -> Path:
        return self.cache_dir / f"{cache_key}.json"

    def _entries(self) -> Iterator[Path]:
        return iter(sorted(self.cache_dir.glob("*.json")))

    @staticmethod
    def _load(entry: Path) -> Optional[Dict[str, Any]]:
        try:
            with open(entry, "r", encoding="utf-8") as f:
                return json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            logger.warning(f"⚠️ entrada de cache ilegível {entry.name}: {e}")
            return None

    def _expires_at(self, envelope: Dict[str, Any]) -> Optional[datetime]:
        try:
            created = datetime.fromisoformat(envelope["created_at"])
            return created + timedelta(hours=float(envelope.get("ttl_hours", self.default_ttl_hours)))
        except (KeyError, TypeError, ValueError):
            return None

    def _status(self, entry: Path) -> Tuple[Optional[Dict[str, Any]], bool]:
        """(envelope, ainda válido); entradas ilegíveis contam como vencidas"""
        envelope = self._load(entry)
        if envelope is None:
            return None, False
        expires = self._expires_at(envelope)
        return envelope, expires is not None and datetime.now() < expires

    def _remove(self, entry: Path) -> bool:
        try:
            entry.unlink()
        except OSError as e:
            logger.warning(f"⚠️ não foi possível remover {entry.name}: {e}")
            return False
        logger.debug(f"entrada removida: {entry.name}")
        return True

    def get_cached_report(self, cache_key: str) -> Optional[Dict[str, Any]]:
        """
        Relatório guardado para a configuração, se ainda válido

        Entradas vencidas ou ilegíveis são tratadas como ausentes; as vencidas
        são apagadas na hora.
        """
        entry = self._entry_path(cache_key)
        if not entry.exists():
            return None
        envelope, valid = self._status(entry)
        if envelope is None:
            return None
        if not valid:
            logger.debug(f"relatório vencido: {cache_key}")
            self._remove(entry)
            return None
        logger.info(f"✅ relatório reaproveitado do cache: {cache_key}")
        return envelope.get("data")

    def save_report(self, cache_key: str, payload: Dict[str, Any],
                    ttl_hours: Optional[float] = None) -> bool:
        """
        Guarda o relatório serializado

        Args:
            cache_key: Chave da configuração do experimento
            payload: ExperimentReport.to_dict()
            ttl_hours: Validade desta entrada (padrão do gerenciador se None)

        Returns:
            False quando o relatório não pôde ser serializado ou gravado
        """
        envelope = {
            "cache_key": cache_key,
            "created_at": datetime.now().isoformat(),
            "ttl_hours": ttl_hours or self.default_ttl_hours,
            "data": payload,
        }
        try:
            atomic_write(self._entry_path(cache_key), dumps(envelope))
        except (OSError, TypeError, ValueError) as e:
            logger.error(f"❌ relatório não guardado no cache ({cache_key}): {e}")
            return False
        logger.info(f"💾 relatório guardado no cache: {cache_key}")
        return True

    def invalidate(self, cache_key: str) -> bool:
        entry = self._entry_path(cache_key)
        if not entry.exists():
            return False
        removed = self._remove(entry)
        if removed:
            logger.info(f"🗑️ relatório invalidado: {cache_key}")
        return removed

    def clear_cache(self) -> int:
        """Apaga todas as entradas; devolve quantas foram removidas"""
        removed = sum(self._remove(entry) for entry in self._entries())
        logger.info(f"🧹 cache esvaziado: {removed} relatórios removidos")
        return removed

    def clear_expired_cache(self) -> int:
        """Apaga entradas vencidas ou ilegíveis; devolve quantas foram removidas"""
        removed = 0
        for entry in self._entries():
            _, valid = self._status(entry)
            if not valid and self._remove(entry):
                removed += 1
        logger.info(f"🧹 relatórios vencidos removidos: {removed}")
        return removed

    def get_cache_info(self) -> Dict[str, Any]:
        """Contagem de entradas válidas e vencidas e espaço ocupado"""
        entries = list(self._entries())
        valid = 0
        size = 0
        for entry in entries:
            try:
                size += entry.stat().st_size
            except OSError:
                continue
            valid += int(self._status(entry)[1])
        return {
            "cache_dir": str(self.cache_dir),
            "total_files": len(entries),
            "valid_files": valid,
            "expired_files": len(entries) - valid,
            "total_size_bytes": size,
            "total_size_mb": round(size / (1024 * 1024), 2),
        }
