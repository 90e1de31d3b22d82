# coding: utf-8
"""
Experiment configuration files.

A configuration is a JSON object.  The domain comes from ``"B"`` (integer
rows) or ``"preset"``; every field that feeds exact arithmetic is an
integer or a ``[num, den]`` pair, never a float::

    {"preset": "example-3d", "b": [1, 1, 1],
     "s_grid": {"dyadic": [4, 16]}, "truncation": 48,
     "samples": 1000000, "seed": 7}
"""
import json
import os
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

from path_helpers import path

from .core import IntegerMatrix, LabError, as_integer_matrix
from .reinhardt import ReinhardtAngularSet

#: Environment variable naming the default output directory.
OUTPUT_DIR_ENV = 'BERGMAN_LAB_OUTPUT_DIR'

CRE_PRESET = re.compile(r'^\s*(?P<name>[a-z0-9-]+)\s*(\((?P<args>[^()]*)\))?\s*$')

SUITES = ('restricted', 'polydisc')
MODES = ('projection', 'concentration')

DEFAULT_SEED = 0
DEFAULT_SAMPLES = 10 ** 5
DEFAULT_TRUNCATION = 48


class ConfigError(LabError, ValueError):
    """Configuration problem located at ``path:line:column`` in ``field``."""
    def __init__(self, message: str, path=None, line: Optional[int] = None, column: Optional[int] = None,
                 field: Optional[str] = None):
        self.message = message
        self.path = path
        self.line = line
        self.column = column
        self.field = field
        super().__init__(str(self))

    def __str__(self):
        location = str(self.path) if self.path is not None else '<config>'
        if self.line is not None:
            location += f':{self.line}'
            if self.column is not None:
                location += f':{self.column}'
        prefix = f'{location}: ' + (f'field "{self.field}": ' if self.field else '')
        return prefix + self.message


def _hartogs_nd(*ks: int) -> List[List[int]]:
    # {|z_1|^k_1 < |z_2|^k_2 < ... < |z_n|^k_n < 1}
    n = len(ks)
    rows = []
    for j in range(n):
        row = [0] * n
        row[j] = ks[j]
        if j + 1 < n:
            row[j + 1] = -ks[j + 1]
        rows.append(row)
    return rows


#: Preset name -> (number of integer arguments or ``None`` for any, builder).
PRESETS = {
    'hartogs': (0, lambda: [[1, -1], [0, 1]]),
    'hartogs-generalized': (2, lambda a, b: [[a, -b], [0, 1]]),
    'hartogs-nd': (None, _hartogs_nd),
    'example-3d': (0, lambda: [[1, 0, 0], [-1, 1, 0], [1, -1, 1]]),
}


def preset_matrix(preset: str) -> IntegerMatrix:
    """
    Matrix of a named preset such as ``hartogs``, ``hartogs-generalized(2,1)``,
    ``hartogs-nd(1,1,1)`` or ``example-3d``.
    """
    match = CRE_PRESET.match(preset)
    if not match or match.group('name') not in PRESETS:
        raise ValueError(f'Unknown preset {preset!r}; expected one of {sorted(PRESETS)}.')
    arity, builder = PRESETS[match.group('name')]
    text = match.group('args')
    args = [] if not text or not text.strip() else [a.strip() for a in text.split(',')]
    try:
        args = [int(a) for a in args]
    except ValueError:
        raise ValueError(f'Preset arguments must be integers, got {text!r}.')
    if arity is not None and len(args) != arity:
        raise ValueError(f'Preset {match.group("name")} takes {arity} argument(s), got {len(args)}.')
    if arity is None and len(args) < 2:
        raise ValueError(f'Preset {match.group("name")} needs at least two exponents.')
    if any(a <= 0 for a in args):
        raise ValueError(f'Preset exponents must be positive, got {args}.')
    return as_integer_matrix(builder(*args))


@dataclass
class ExperimentConfig:
    """
    Every parameter of a run.  Fields a command does not use are ignored.
    """
    B: Optional[IntegerMatrix] = None
    preset: Optional[str] = None
    alpha: Optional[Tuple[Fraction, ...]] = None
    b: Optional[Tuple[int, ...]] = None
    s: Optional[Fraction] = None
    s_grid: List[Fraction] = field(default_factory=list)
    dyadic: Optional[Tuple[int, int]] = None
    truncation: int = DEFAULT_TRUNCATION
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    workers: int = 1
    output: Optional[str] = None
    suite: str = 'restricted'
    mode: str = 'projection'
    p: Optional[Fraction] = None
    t: Fraction = Fraction(2)
    epsilon: Optional[Fraction] = None
    log_power: Fraction = Fraction(0)
    fit_s: Optional[Fraction] = None
    sets: List[ReinhardtAngularSet] = field(default_factory=list)
    family: Optional[Tuple[int, int]] = None
    source: Optional[str] = None

    @property
    def dimension(self) -> Optional[int]:
        if self.B is not None:
            return len(self.B)
        if self.alpha is not None:
            return len(self.alpha)
        return None

    def output_dir(self, override=None) -> path:
        """``override``, else the config's ``output``, else ``$BERGMAN_LAB_OUTPUT_DIR``, else ``.``."""
        for candidate in (override, self.output, os.environ.get(OUTPUT_DIR_ENV)):
            if candidate:
                return path(candidate)
        return path('.')


def _locate(text: str, key: str) -> Tuple[Optional[int], Optional[int]]:
    index = text.find(f'"{key}"')
    if index < 0:
        return None, None
    line = text.count('\n', 0, index) + 1
    return line, index - (text.rfind('\n', 0, index) + 1) + 1


class _Parser:
    def __init__(self, text: str, source=None):
        self.text = text
        self.source = source

    def error(self, key: str, message: str) -> ConfigError:
        line, column = _locate(self.text, key.split('.')[0])
        return ConfigError(message, self.source, line, column, key)

    def integer(self, data: dict, key: str, minimum: Optional[int] = None) -> int:
        value = data[key]
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.error(key, f'expected an integer, got {value!r}')
        if minimum is not None and value < minimum:
            raise self.error(key, f'must be at least {minimum}, got {value}')
        return value

    def rational(self, value, key: str) -> Fraction:
        if isinstance(value, bool) or isinstance(value, float):
            raise self.error(key, f'{value!r} is not exact; write an integer or a [num, den] pair')
        if isinstance(value, int):
            return Fraction(value)
        if (isinstance(value, list) and len(value) == 2 and
                all(isinstance(v, int) and not isinstance(v, bool) for v in value)):
            if value[1] == 0:
                raise self.error(key, 'zero denominator')
            return Fraction(value[0], value[1])
        raise self.error(key, f'expected an integer or a [num, den] pair, got {value!r}')

    def rationals(self, data: dict, key: str) -> Tuple[Fraction, ...]:
        value = data[key]
        if not isinstance(value, list) or not value:
            raise self.error(key, f'expected a nonempty list, got {value!r}')
        return tuple(self.rational(v, key) for v in value)

    def dyadic(self, value, key: str) -> Tuple[int, int]:
        bounds = value.get('dyadic') if isinstance(value, dict) else None
        if (not isinstance(bounds, list) or len(bounds) != 2 or
                not all(isinstance(k, int) and not isinstance(k, bool) for k in bounds) or bounds[0] > bounds[1]):
            raise self.error(key, f'expected {{"dyadic": [k0, k1]}} with k0 <= k1, got {value!r}')
        return bounds[0], bounds[1]

    def matrix(self, data: dict) -> Optional[IntegerMatrix]:
        if 'B' in data and 'preset' in data:
            raise self.error('B', 'give either "B" or "preset", not both')
        if 'B' in data:
            try:
                return as_integer_matrix(data['B'])
            except (TypeError, ValueError) as exception:
                raise self.error('B', str(exception))
        if 'preset' in data:
            if not isinstance(data['preset'], str):
                raise self.error('preset', f'expected a string, got {data["preset"]!r}')
            try:
                return preset_matrix(data['preset'])
            except ValueError as exception:
                raise self.error('preset', str(exception))
        return None

    def parse(self, data) -> ExperimentConfig:
        if not isinstance(data, dict):
            raise ConfigError('top level must be a JSON object', self.source, 1, 1)
        config = ExperimentConfig()
        config.B = self.matrix(data)
        config.preset = data.get('preset')
        if 'alpha' in data:
            config.alpha = self.rationals(data, 'alpha')
        if 'b' in data:
            b = self.rationals(data, 'b')
            if any(v.denominator != 1 for v in b):
                raise self.error('b', 'entries must be integers')
            config.b = tuple(int(v) for v in b)
        elif config.preset == 'example-3d':
            config.b = (1, 1, 1)
        if 's' in data:
            config.s = self.rational(data['s'], 's')
        if 's_grid' in data:
            value = data['s_grid']
            if isinstance(value, dict):
                config.dyadic = self.dyadic(value, 's_grid')
                config.s_grid = [Fraction(1, 2 ** k) for k in range(config.dyadic[0], config.dyadic[1] + 1)]
            elif isinstance(value, list):
                config.s_grid = [self.rational(v, 's_grid') for v in value]
            else:
                raise self.error('s_grid', f'expected a list or {{"dyadic": [k0, k1]}}, got {value!r}')
            if any(not 0 < s < 1 for s in config.s_grid):
                raise self.error('s_grid', 'every s must lie in (0, 1)')
        for key in ('truncation', 'samples', 'workers'):
            if key in data:
                setattr(config, key, self.integer(data, key, minimum=1))
        if 'seed' in data:
            config.seed = self.integer(data, 'seed', minimum=0)
        if 'output' in data:
            config.output = str(data['output'])
        for key, choices in (('suite', SUITES), ('mode', MODES)):
            if key in data:
                if data[key] not in choices:
                    raise self.error(key, f'expected one of {choices}, got {data[key]!r}')
                setattr(config, key, data[key])
        for key in ('p', 't', 'epsilon', 'log_power', 'fit_s'):
            if key in data:
                setattr(config, key, self.rational(data[key], key))
        if 'family' in data:
            config.family = self.dyadic(data['family'], 'family')
        if 'sets' in data:
            if not isinstance(data['sets'], list):
                raise self.error('sets', f'expected a list, got {data["sets"]!r}')
            sets = []
            for i, item in enumerate(data['sets']):
                try:
                    sets.append(ReinhardtAngularSet.from_dict(item, config.dimension))
                except (KeyError, TypeError, ValueError, ZeroDivisionError) as exception:
                    raise self.error('sets', f'set {i}: {exception}')
            config.sets = sets
        return config


def parse_config(text: str, source=None) -> ExperimentConfig:
    """
    Parse the JSON ``text`` of a configuration.

    Raises
    ------
    ConfigError
        On malformed JSON (with its line and column) or an invalid field.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exception:
        raise ConfigError(exception.msg, source, exception.lineno, exception.colno)
    config = _Parser(text, source).parse(data)
    config.source = None if source is None else str(source)
    return config


def load_config(config_path) -> ExperimentConfig:
    config_path = path(config_path)
    if not config_path.isfile():
        raise ConfigError('no such file', config_path)
    return parse_config(config_path.text(), config_path)
