import json
import logging
from aiohttp import web

from ..errors import ConfigurationError, HestonMCError, ParameterError
from ..experiment import experiment_from_dict
from ..harness import run_price_async, validate_config


class PricingHandlers:
    """Обработчики валидации и оценки документов эксперимента."""

    def __init__(self, service_instance):
        self.service = service_instance
        self.logger = logging.getLogger(self.__class__.__name__)

    async def _read_experiment(self, request):
        try:
            document = await request.json()
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"Request body is not valid JSON: {e}") from e
        if not isinstance(document, dict):
            raise ConfigurationError("Request body must be a JSON object")
        config_manager = self.service.config_manager
        return experiment_from_dict(document).with_overrides(
            workers=config_manager.get('runtime.workers', 1),
            block_size=config_manager.get('runtime.block_size'),
        )

    @staticmethod
    def _error_response(error: Exception, status: int):
        return web.json_response({'success': False, 'error': str(error)}, status=status)

    async def _api_validate(self, request):
        """Проверка документа эксперимента."""
        try:
            experiment = await self._read_experiment(request)
        except ConfigurationError as e:
            self.logger.warning(f"Rejected experiment document: {e}")
            return self._error_response(e, 400)

        diagnostics = validate_config(experiment)
        self.service.audit_logger.log_diagnostics(diagnostics)
        return web.json_response({
            'success': not any(d.is_error for d in diagnostics),
            'model': experiment.model_label,
            'diagnostics': [d.to_dict() for d in diagnostics],
        })

    async def _api_price(self, request):
        """Оценка цены coupled-sum оценщиком для всех payoff документа."""
        try:
            experiment = await self._read_experiment(request)
        except ConfigurationError as e:
            self.logger.warning(f"Rejected experiment document: {e}")
            return self._error_response(e, 400)

        max_samples = self.service.config_manager.get('service.max_samples', 200000)
        if experiment.samples > max_samples:
            return self._error_response(
                ParameterError(f"samples={experiment.samples} exceeds the service limit {max_samples}"), 400)

        diagnostics = validate_config(experiment)
        self.service.audit_logger.log_diagnostics(diagnostics)
        if any(d.is_error for d in diagnostics):
            return web.json_response({
                'success': False,
                'error': 'Experiment document failed validation',
                'diagnostics': [d.to_dict() for d in diagnostics],
            }, status=400)

        prices = []
        try:
            for payoff in experiment.payoffs:
                report = await run_price_async(experiment, payoff)
                prices.append({'payoff': payoff.label, **report.to_dict()})
                self.service.audit_logger.log_run('api.price', experiment.model_label, payoff.label,
                                                  report.n_samples, experiment.seed, experiment.workers,
                                                  report.elapsed_seconds)
        except (ConfigurationError, ParameterError) as e:
            self.logger.error(f"Pricing failed: {e}")
            return self._error_response(e, 400)
        except HestonMCError as e:
            self.logger.error(f"Pricing failed: {e}")
            return self._error_response(e, 500)

        return web.json_response({
            'success': True,
            'model': experiment.model_label,
            'prices': prices,
            'diagnostics': [d.to_dict() for d in diagnostics],
        })
