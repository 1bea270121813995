"""
Logging for the annulus solver

Two channels: "system" for run lifecycle messages and "audit" for the
verdicts of individual checks. Both write to stderr so stdout stays
free for JSON output.
"""
import logging
import sys
from typing import Iterable, Optional, Tuple

LOG_FORMAT = '%(asctime)s [%(levelname)s] %(name)s: %(message)s'
LOG_DATEFMT = '%H:%M:%S'


def configure_logging(level: str = "INFO", log_file: Optional[str] = None) -> None:
    """Root logging setup used by the CLI entry point"""
    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file, mode='a'))
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format=LOG_FORMAT,
        datefmt=LOG_DATEFMT,
        handlers=handlers,
        force=True,
    )


class SystemLogger:
    """System-level logger for run lifecycle messages"""

    def __init__(self):
        self.logger = logging.getLogger("loewner.system")

    def info(self, message):
        self.logger.info(message)

    def error(self, message):
        self.logger.error(message)

    def warning(self, message):
        self.logger.warning(message)

    def debug(self, message):
        self.logger.debug(message)


class AuditLogger:
    """Audit-level logger for check verdicts"""

    def __init__(self):
        self.logger = logging.getLogger("loewner.audit")

    def passed(self, check: str, detail: str = ""):
        self.logger.info(f"PASS {check} {detail}".rstrip())

    def failed(self, check: str, detail: str = ""):
        self.logger.warning(f"FAIL {check} {detail}".rstrip())

    def skipped(self, check: str, reason: str):
        self.logger.debug(f"SKIP {check} ({reason})")

    def verdict(self, check: str, ok: bool, detail: str = ""):
        if ok:
            self.passed(check, detail)
        else:
            self.failed(check, detail)


def format_value(value) -> str:
    """Format a table cell"""
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.3e}"
    return str(value)


def format_table(rows: Iterable[Tuple[str, object, Optional[bool]]], title: str) -> str:
    """Fixed-width table of (check, value, verdict) rows"""
    lines = ["=" * 64, title, "-" * 64, f"{'CHECK':<24} | {'VALUE':<22} | OK"]
    lines.append("-" * 64)
    for name, value, ok in rows:
        lines.append(f"{name:<24} | {format_value(value):<22} | {format_value(ok)}")
    lines.append("=" * 64)
    return "\n".join(lines)


def log_report_table(report, logger: Optional[SystemLogger] = None) -> None:
    """
    Log a verification report as a single table message

    Args:
        report: VerificationReport to render
        logger: Destination, defaults to the system channel
    """
    logger = logger or SystemLogger()
    rows = [
        ("regime", report.regime, None),
        ("pde residual (rel)", report.pde_residual_rel, report.residual_ok),
        ("H drift", report.h_drift, report.drift_ok),
        ("cone", report.cone_violations, report.cone_ok),
        ("holder exponent", report.holder_exponent, report.holder_ok),
        ("jump left", report.jump_left, report.jump_ok),
        ("jump right", report.jump_right, report.jump_ok),
        ("boundary slope", report.boundary_slope, report.boundary_ok),
        ("touching certificate", report.certificate.gap if report.certificate else None,
         report.certificate.passed if report.certificate else None),
    ]
    title = f"AUDIT {'PASSED' if report.passed else 'FAILED'}"
    logger.info("\n" + format_table(rows, title))
