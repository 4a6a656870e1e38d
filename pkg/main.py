"""
Heston / stochastic-rate Monte Carlo harness
============================================

Command-line entry point: validation, unbiased pricing, convergence and RMSE
experiments, sampler diagnostics and the HTTP pricing service.
"""

import argparse
import logging
import sys
from typing import List, Optional

from src.audit_logger import AuditLogger
from src.commands import COMMANDS
from src.config_manager import get_config
from src.logging_config import setup_logging

DEFAULT_EXPERIMENT = 'config/experiments/cir_exact.json'


class HarnessApp:
    """
    Application object shared by the subcommands.
    """

    def __init__(self, config_manager=None, log_to_file: bool = True):
        self.config_manager = config_manager or get_config()
        if not log_to_file:
            self.config_manager.set('logging.standard_log.file', None)
            self.config_manager.set('logging.audit_log.file', None)

        # Initialize centralized logging FIRST
        setup_logging(self.config_manager.config)

        self.logger = logging.getLogger(self.__class__.__name__)
        self.audit_logger = AuditLogger(self.config_manager)
        self._init_commands()

    def _init_commands(self):
        self.commands = {cls.name: cls(self) for cls in COMMANDS}

    def run(self, args) -> int:
        self.logger.debug(f"Running {args.command}")
        return self.commands[args.command].run(args)


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    """Flags accepted both before and after the subcommand name."""

    def default(value):
        return argparse.SUPPRESS if suppress else value

    flags = argparse.ArgumentParser(add_help=False)
    flags.add_argument('--config', default=default(DEFAULT_EXPERIMENT), help='experiment document (JSON)')
    flags.add_argument('--settings', default=default('config/config.yml'), help='application settings (YAML)')
    flags.add_argument('--seed', type=int, default=default(None), help='64-bit seed')
    flags.add_argument('--samples', type=int, default=default(None), help='number of samples')
    flags.add_argument('--workers', type=int, default=default(None), help='worker processes')
    flags.add_argument('--output', default=default(None), help='CSV output path')
    flags.add_argument('--max-level', dest='max_level', type=int, default=default(None),
                       help='cap on the randomized level (biases prices, diagnostics only)')
    flags.add_argument('--no-log-file', dest='no_log_file', action='store_true', default=default(False),
                       help='log to the console only')
    return flags


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='heston-mc', description='Unbiased Monte Carlo for Heston with stochastic interest rates',
        parents=[_global_flags(suppress=False)])
    sub = parser.add_subparsers(dest='command', required=True)
    local = [_global_flags(suppress=True)]

    sub.add_parser('validate', parents=local, help='check an experiment document')
    sub.add_parser('price', parents=local, help='coupled-sum price with a 95%% confidence interval')
    sub.add_parser('convergence', parents=local, help='Err(h) per level and fitted slope')
    sub.add_parser('rmse-table', parents=local, help='RMSE and work against a fine reference')
    sub.add_parser('diagnostics', parents=local, help='exact-sampler moment and order checks')
    serve = sub.add_parser('serve', parents=local, help='HTTP pricing service')
    serve.add_argument('--host', default=None)
    serve.add_argument('--port', type=int, default=None)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    app = HarnessApp(get_config(args.settings, reload=True), log_to_file=not args.no_log_file)
    return app.run(args)


if __name__ == '__main__':
    sys.exit(main())
