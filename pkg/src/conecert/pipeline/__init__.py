"""Orchestration: parameters, certificate ledger, reports and the command line."""

from .certify import CertificateReport, certify, check_report, emit_report, exit_code
from .params import ConstructionParams, ParamError, required_level, validate_params

__all__ = [
    "CertificateReport",
    "ConstructionParams",
    "ParamError",
    "certify",
    "check_report",
    "emit_report",
    "exit_code",
    "required_level",
    "validate_params",
]
