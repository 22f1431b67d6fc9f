"""
Scenario configuration for uqflow project.

A scenario is a JSON document validated by ``ScenarioSerializer``. The
validated value is held in a ``ScenarioConfig``; dumping it writes every
field, defaults included, so load → dump → load gives the same config.
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, TextIO, Tuple, Union

import numpy as np

from common.exceptions import ConfigError
from common.utils import merge_overrides
from dynamics.integrators import IntegratorSettings, default_settings
from dynamics.systems import system_from_config
from uq_methods.beliefs import GaussianBelief

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MethodSpec:
    method: str
    propagation: str

    @property
    def label(self) -> str:
        # Import here to avoid circular imports
        from .serializers import method_label

        return method_label(self.method, self.propagation)


@dataclass(frozen=True)
class ScenarioConfig:
    """
    Validated scenario. Build instances with ``from_dict``/``load``; the
    constructor does not validate.
    """

    name: str
    seed: int
    system: Dict[str, Any]
    reference: Dict[str, Any]
    horizon: float
    belief: Dict[str, Any]
    integrator: Dict[str, Any]
    maps: Dict[str, Any]
    methods: List[Dict[str, str]]
    reference_method: Optional[str]
    mc: Dict[str, Any]
    ut: Dict[str, Any]
    pce: Dict[str, Any]
    gmm: Dict[str, Any]
    contour: Optional[Dict[str, Any]]
    batch_size: int
    threads: int
    output: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> 'ScenarioConfig':
        """
        Validate a scenario document.

        Raises:
            ConfigError: with the serializer's field errors
        """
        # Import here to avoid circular imports
        from .serializers import ScenarioSerializer

        if not isinstance(document, dict):
            raise ConfigError("scenario must be a JSON object")
        serializer = ScenarioSerializer(data=document)
        if not serializer.is_valid():
            errors = json.loads(json.dumps(serializer.errors))
            raise ConfigError(f"invalid scenario: {json.dumps(errors, sort_keys=True)}", errors)
        return cls(**json.loads(json.dumps(serializer.validated_data)))

    @classmethod
    def loads(cls, text: str) -> 'ScenarioConfig':
        try:
            document = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"scenario is not valid JSON: {exc}") from exc
        return cls.from_dict(document)

    @classmethod
    def load(cls, source: Union[str, Path, TextIO]) -> 'ScenarioConfig':
        if hasattr(source, 'read'):
            return cls.loads(source.read())
        return cls.loads(Path(source).read_text(encoding='utf-8'))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + '\n'

    def dump(self, target: Union[str, Path, TextIO]):
        if hasattr(target, 'write'):
            target.write(self.dumps())
            return
        path = Path(target)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps(), encoding='utf-8')

    def with_overrides(self, seed: Optional[int] = None, out_dir: Optional[str] = None,
                       samples: Optional[int] = None) -> 'ScenarioConfig':
        """Command-line overrides, re-validated."""
        overrides = {
            'seed': seed,
            'mc': {'samples': samples},
            'output': {'directory': out_dir},
        }
        return ScenarioConfig.from_dict(merge_overrides(self.to_dict(), overrides))

    @property
    def system_kind(self) -> str:
        return self.system['kind']

    @property
    def method_specs(self) -> List[MethodSpec]:
        return [MethodSpec(m['method'], m['propagation']) for m in self.methods]

    @property
    def labels(self) -> List[str]:
        return [spec.label for spec in self.method_specs]

    def needs_map(self, propagation: str) -> bool:
        return any(spec.propagation == propagation for spec in self.method_specs)

    def build_system(self):
        return system_from_config(self.system)

    def integrator_settings(self, system) -> IntegratorSettings:
        """System defaults with the scenario's tolerances and step rule applied."""
        changes = {
            'rtol': self.integrator['rtol'],
            'atol': self.integrator['atol'],
            'method': self.integrator['method'],
        }
        if self.integrator['poly_step'] is not None:
            changes.update(poly_step=self.integrator['poly_step'], poly_steps_per_unit=None)
        elif self.integrator['poly_steps_per_unit'] is not None:
            changes.update(poly_step=None, poly_steps_per_unit=self.integrator['poly_steps_per_unit'])
        return default_settings(system).with_overrides(**changes)

    def explicit_belief(self) -> GaussianBelief:
        return GaussianBelief(np.array(self.belief['mean'], dtype=float),
                              np.array(self.belief['covariance'], dtype=float))

    def contour_slice(self) -> Optional[Tuple[Tuple[int, int], float, int]]:
        if self.contour is None:
            return None
        return tuple(self.contour['indices']), self.contour['k'], self.contour['points']
