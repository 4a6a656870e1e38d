"""
Experiment documents.

A document is JSON (YAML is accepted too, it is parsed with ``yaml.safe_load``)
with the blocks ``heston``, ``rate``, ``experiment``, ``payoffs`` and
``output``. Missing keys fall back to the desk-scale defaults below.
"""

import copy
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml

from .errors import ConfigurationError, HestonMCError
from .estimators import DEFAULT_BLOCK_SIZE, LevelDistribution
from .payoffs import Payoff, payoff_from_dict
from .rate_models import RateModel, rate_model_from_dict
from .variance_process import HestonParams

logger = logging.getLogger(__name__)

DEFAULT_FIT_WINDOW: Tuple[int, int] = (2, 6)

DEFAULT_DOCUMENT: Dict[str, Any] = {
    'name': None,
    'experiment': {
        'levels': [2, 3, 4, 5, 6],
        'ref_level': 9,
        'samples': 200000,
        'seed': 0,
        'tail_exponent': 1.5,
        'tail_table': None,
        'max_level': None,
        'fit_window': list(DEFAULT_FIT_WINDOW),
    },
    'payoffs': [{'type': 'put', 'strike': 1.0}],
    'output': 'results/output.csv',
}


@dataclass
class ExperimentConfig:
    heston: HestonParams
    rate: RateModel
    payoffs: List[Payoff]
    levels: List[int] = field(default_factory=lambda: [2, 3, 4, 5, 6])
    ref_level: int = 9
    samples: int = 200000
    seed: int = 0
    tail_exponent: float = 1.5
    output_path: Path = Path('results/output.csv')
    tail_table: Optional[Tuple[float, ...]] = None
    max_level: Optional[int] = None
    fit_window: Tuple[int, int] = DEFAULT_FIT_WINDOW
    workers: int = 1
    block_size: int = DEFAULT_BLOCK_SIZE
    name: Optional[str] = None

    @property
    def model_label(self) -> str:
        return self.name or self.rate.label

    def level_distribution(self) -> LevelDistribution:
        if self.tail_table is not None:
            return LevelDistribution.from_table(self.tail_table)
        return LevelDistribution.geometric(self.tail_exponent)

    def with_overrides(self, **overrides) -> 'ExperimentConfig':
        """Copy with the non-None keyword values applied (CLI flags)."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        if 'output_path' in changes:
            changes['output_path'] = Path(changes['output_path'])
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            'name': self.name,
            'heston': {'k': self.heston.k, 'theta': self.heston.theta, 'sigma': self.heston.sigma,
                       'rho': self.heston.rho, 's0': self.heston.s0, 'v0': self.heston.v0, 't': self.heston.t},
            'rate': self.rate.to_dict(),
            'experiment': {'levels': list(self.levels), 'ref_level': self.ref_level, 'samples': self.samples,
                           'seed': self.seed, 'tail_exponent': self.tail_exponent,
                           'tail_table': list(self.tail_table) if self.tail_table else None,
                           'max_level': self.max_level, 'fit_window': list(self.fit_window)},
            'payoffs': [p.to_dict() for p in self.payoffs],
            'output': str(self.output_path),
        }


def _merge(base: Dict, override: Dict) -> Dict:
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _merge(base[key], value)
        else:
            base[key] = value
    return base


def _as_int(value, name: str) -> int:
    """Integer field; numeric strings such as YAML's unquoted ``1e5`` are accepted."""
    if isinstance(value, str):
        try:
            value = float(value) if any(ch in value for ch in '.eE') else int(value)
        except ValueError as e:
            raise ConfigurationError(f"{name} must be an integer, got {value!r}") from e
    if isinstance(value, bool) or isinstance(value, float) and not value.is_integer():
        raise ConfigurationError(f"{name} must be an integer, got {value!r}")
    try:
        return int(value)
    except (TypeError, ValueError, OverflowError) as e:
        raise ConfigurationError(f"{name} must be an integer, got {value!r}") from e


def experiment_from_dict(document: Dict[str, Any]) -> ExperimentConfig:
    data = _merge(copy.deepcopy(DEFAULT_DOCUMENT), document or {})
    try:
        h = data['heston']
        heston = HestonParams(k=float(h['k']), theta=float(h['theta']), sigma=float(h['sigma']),
                              rho=float(h['rho']), s0=float(h['s0']), v0=float(h['v0']),
                              t=float(h.get('t', 1.0)))
        rate = rate_model_from_dict(data['rate'])
        payoffs = [payoff_from_dict(p) for p in data['payoffs']]
        e = data['experiment']
        tail_table = e.get('tail_table')
        max_level = e.get('max_level')
        window = e.get('fit_window') or list(DEFAULT_FIT_WINDOW)
        return ExperimentConfig(
            heston=heston,
            rate=rate,
            payoffs=payoffs,
            levels=[_as_int(n, 'levels') for n in e['levels']],
            ref_level=_as_int(e['ref_level'], 'ref_level'),
            samples=_as_int(e['samples'], 'samples'),
            seed=_as_int(e['seed'], 'seed'),
            tail_exponent=float(e['tail_exponent']),
            tail_table=tuple(float(v) for v in tail_table) if tail_table else None,
            max_level=_as_int(max_level, 'max_level') if max_level is not None else None,
            fit_window=(_as_int(window[0], 'fit_window'), _as_int(window[1], 'fit_window')),
            output_path=Path(data['output']),
            name=data.get('name'),
        )
    except KeyError as e:
        raise ConfigurationError(f"Experiment document is missing key {e}") from e
    except HestonMCError:
        raise
    except (TypeError, ValueError, IndexError) as e:
        raise ConfigurationError(f"Invalid experiment document: {e}") from e


def load_experiment(path) -> ExperimentConfig:
    config_file = Path(path)
    if not config_file.exists():
        raise ConfigurationError(f"Experiment file not found: {config_file}")
    try:
        with open(config_file, 'r', encoding='utf-8') as f:
            document = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ConfigurationError(f"Cannot parse {config_file}: {e}") from e
    if not isinstance(document, dict):
        raise ConfigurationError(f"Experiment document {config_file} must be a mapping")
    logger.info(f"Loaded experiment from {config_file}")
    return experiment_from_dict(document)
