from dataclasses import dataclass
from typing import Dict, List, Tuple, Union
import numpy as np
from ..Utils.configuration_parser import ParameterKind


ParamValue = Union[float, int]


@dataclass(frozen=True)
class Parameter:
    name: str
    low: float
    high: float
    kind: ParameterKind = ParameterKind.Real

    def __post_init__(self):
        if not self.low < self.high:
            raise ValueError('Parameter {}: lower bound {} must be below upper bound {}.'.format(
                self.name, self.low, self.high))
        if self.kind == ParameterKind.Integer and (self.low != int(self.low) or self.high != int(self.high)):
            raise ValueError('Parameter {}: integer bounds must be integral.'.format(self.name))

    @property
    def span(self) -> float:
        return self.high - self.low

    def contains(self, value: ParamValue) -> bool:
        if self.kind == ParameterKind.Integer and value != int(value):
            return False
        return self.low <= value <= self.high

    def clip(self, value: float) -> ParamValue:
        """
        Maps a real-line value into the domain, rounding integer parameters.
        """
        if self.kind == ParameterKind.Integer:
            return int(min(max(int(np.round(value)), int(self.low)), int(self.high)))
        return float(min(max(value, self.low), self.high))


@dataclass(frozen=True)
class SearchDomain:
    parameters: Tuple[Parameter, ...]

    def __post_init__(self):
        names = [p.name for p in self.parameters]
        if len(set(names)) != len(names):
            raise ValueError('Parameter names must be unique.')

    @property
    def names(self) -> List[str]:
        return [p.name for p in self.parameters]

    def contains(self, params: Dict[str, ParamValue]) -> bool:
        return set(params) == set(self.names) and all([p.contains(params[p.name]) for p in self.parameters])


def default_domain() -> SearchDomain:
    """
    Search domain of the seven tuned boosting hyper-parameters.
    """
    return SearchDomain(parameters=(
        Parameter('learning_rate', 0.005, 0.2),
        Parameter('subsample', 0.8, 1.0),
        Parameter('max_leaves', 10, 200, ParameterKind.Integer),
        Parameter('max_depth', 5, 30, ParameterKind.Integer),
        Parameter('gamma', 0.0, 0.02),
        Parameter('colsample_bytree', 0.8, 1.0),
        Parameter('min_child_weight', 0.0, 10.0),
    ))


def sample_uniform(domain: SearchDomain, rng: Union[int, np.random.Generator]) -> Dict[str, ParamValue]:
    """
    Independent uniform draw of every parameter: continuous on [low, high) for reals, uniform over
    {low, ..., high} for integers.

    Parameters
    ----------
    domain : SearchDomain
        Space to sample from.
    rng : int or np.random.Generator
        Seed or random stream; passing the same generator state twice yields the same draw.
    Returns
    -------
    dict
        Parameter name -> value.
    """
    rng = np.random.default_rng(rng)
    params = {}
    for p in domain.parameters:
        if p.kind == ParameterKind.Integer:
            params[p.name] = int(rng.integers(int(p.low), int(p.high) + 1))
        else:
            params[p.name] = float(rng.uniform(p.low, p.high))
    return params
