"""
Hierarquia de erros do toolkit
"""

from typing import Any, Optional


class SteinError(Exception):
    """Erro base do toolkit."""


class InputValidationError(SteinError, ValueError):
    """Entrada viola o contrato: campo, domínio, forma ou pré-condição."""

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class OrderViolationError(SteinError):
    """Acoplamento monótono pedido para um par que não satisfaz ≤_st."""

    def __init__(self, message: str, verdict: Any = None):
        self.verdict = verdict
        super().__init__(message)


class NumericalPrecisionError(SteinError, FloatingPointError):
    """Quadratura sem recuperação (massa não finita, variância não positiva)."""
