"""
Centralized logging configuration for the pricing harness.
Each component gets its own logger instance via logging.getLogger(__name__).
"""

import logging
import sys
from pathlib import Path
from logging.handlers import RotatingFileHandler
from typing import Dict, Any, Optional

AUDIT_LOGGERS = [
    'AuditLoggerRun',  # запуски команд
    'AuditLoggerAPI',  # HTTP вызовы сервиса
    'AuditLoggerDiagnostics',  # диагностики валидации и самопроверок
]

# Flag to prevent multiple setup calls
_logging_configured = False


def _rotating_handler(path: Path, max_size: int, level: int, formatter: logging.Formatter) -> RotatingFileHandler:
    handler = RotatingFileHandler(path, maxBytes=max_size, backupCount=5, encoding='utf-8')
    handler.setLevel(level)
    handler.setFormatter(formatter)
    return handler


def _console_handler(level, formatter: logging.Formatter) -> logging.StreamHandler:
    handler = logging.StreamHandler(sys.stdout)
    handler.setLevel(level)
    handler.setFormatter(formatter)
    return handler


def setup_logging(config: Dict[str, Any], force: bool = False) -> None:
    """
    Setup root and audit logging from the ``logging`` section of the settings.

    A ``file`` of None disables the corresponding file handlers.
    """
    global _logging_configured
    if _logging_configured and not force:
        return

    logging_config = config.get('logging', {}).get('standard_log', {})
    audit_config = config.get('logging', {}).get('audit_log', {})

    log_level = str(logging_config.get('level', 'INFO')).upper()
    log_file: Optional[str] = logging_config.get('file', 'logs/heston_mc.log')
    log_to_console = logging_config.get('console', True)
    log_format = logging_config.get('format', '%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    max_size = logging_config.get('max_size', 10 * 1024 * 1024)

    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)
    root_logger.handlers.clear()

    formatter = logging.Formatter(log_format)

    if log_to_console:
        root_logger.addHandler(_console_handler(log_level, formatter))

    if log_file:
        log_path = Path(log_file).parent
        log_path.mkdir(parents=True, exist_ok=True)
        root_logger.addHandler(_rotating_handler(Path(log_file), max_size, log_level, formatter))
        # Отдельный файл только для ошибок
        root_logger.addHandler(_rotating_handler(log_path / 'errors.log', max_size, logging.ERROR, formatter))

    audit_enabled = audit_config.get('enable', True)
    audit_formatter = logging.Formatter(audit_config.get('format', '%(asctime)s - %(name)s - AUDIT - %(message)s'))
    audit_file = audit_config.get('file', 'logs/audit.log')
    for logger_name in AUDIT_LOGGERS:
        audit_logger = logging.getLogger(logger_name)
        audit_logger.propagate = False  # Важно: не передавать в корневой логгер
        audit_logger.setLevel(logging.INFO)
        audit_logger.handlers.clear()
        if not audit_enabled:
            audit_logger.addHandler(logging.NullHandler())
            continue

        if audit_file:
            Path(audit_file).parent.mkdir(parents=True, exist_ok=True)
            audit_logger.addHandler(_rotating_handler(Path(audit_file), audit_config.get('max_size', max_size),
                                                      logging.INFO, audit_formatter))
        if audit_config.get('console', False):
            audit_logger.addHandler(_console_handler(logging.INFO, audit_formatter))

    logger = logging.getLogger('LoggingConfig')
    logger.debug(f"Logging initialized: level={log_level}, file={log_file}, console={log_to_console}")
    if audit_enabled:
        logger.debug(f"Audit logging enabled: file={audit_file}, console={audit_config.get('console')}")

    _logging_configured = True
