"""
Run configuration of the synth command.

The file is a flat list of ``key = value`` lines with ``#`` comments, read
with the same django-environ reader that loads the project's .env file.
"""
from dataclasses import asdict, dataclass
import io
import logging
from pathlib import Path
from typing import Optional

from django.core.exceptions import ImproperlyConfigured
from environ import Env

from .errors import ConfigError

logger = logging.getLogger(__name__)

MIN_NODES = 8

REQUIRED_KEYS = ('k', 'a1', 'a2', 'eps')
FLOAT_KEYS = {
    't1_min': -0.08, 't1_max': 0.08,
    't2_min': -0.08, 't2_max': 0.08,
    'r_min': -0.6, 'r_max': 0.6,
    't_init': 0.0, 'u0': 2.0, 'du0': 0.0,
}
INT_KEYS = {'N1': 32, 'N2': 32, 'Nr': 32}
OPTIONAL_FLOAT_KEYS = ('tol', 'stencil_tol', 'model_k')
KNOWN_KEYS = set(REQUIRED_KEYS) | set(FLOAT_KEYS) | set(INT_KEYS) | set(OPTIONAL_FLOAT_KEYS) | {'out'}


@dataclass
class NetConfig:
    k: float
    a1: float
    a2: float
    eps: str
    N1: int = 32
    N2: int = 32
    Nr: int = 32
    t1_min: float = -0.08
    t1_max: float = 0.08
    t2_min: float = -0.08
    t2_max: float = 0.08
    r_min: float = -0.6
    r_max: float = 0.6
    t_init: float = 0.0
    u0: float = 2.0
    du0: float = 0.0
    tol: Optional[float] = None
    stencil_tol: Optional[float] = None
    model_k: Optional[float] = None
    out: Optional[str] = None

    @property
    def eps2(self):
        return 1.0 if self.eps == '1' else -1.0

    @property
    def shape(self):
        return (self.N1, self.N2, self.Nr)

    @property
    def t1_span(self):
        return (self.t1_min, self.t1_max)

    @property
    def t2_span(self):
        return (self.t2_min, self.t2_max)

    @property
    def r_span(self):
        return (self.r_min, self.r_max)

    def as_dict(self):
        return asdict(self)

    @classmethod
    def parse(cls, text):
        """
        Build a NetConfig from configuration text.

        Raises:
            ConfigError: for malformed lines, unknown or missing keys, bad numbers
                and values outside their domain
        """
        values = _read_pairs(text)
        unknown = sorted(set(values) - KNOWN_KEYS)
        if unknown:
            raise ConfigError(f"Unknown configuration keys: {', '.join(unknown)}")

        reader = type('NetConfigEnv', (Env,), {'ENVIRON': values})()
        try:
            options = {key: reader(key, cast=_real) for key in ('k', 'a1', 'a2')}
            options['eps'] = reader.str('eps').strip().strip('"\'')
            for key, default in FLOAT_KEYS.items():
                options[key] = reader(key, cast=_real, default=default)
            for key, default in INT_KEYS.items():
                options[key] = reader.int(key, default=default)
            for key in OPTIONAL_FLOAT_KEYS:
                options[key] = reader(key, cast=_real) if key in values else None
            options['out'] = reader.str('out', default=None)
        except ImproperlyConfigured as e:
            raise ConfigError(f"Missing configuration key: {str(e)}")
        except ValueError as e:
            raise ConfigError(f"Bad number in configuration: {str(e)}")

        config = cls(**options)
        config.validate()
        return config

    @classmethod
    def load(cls, path):
        try:
            text = Path(path).read_text(encoding='utf8')
        except (OSError, UnicodeDecodeError) as e:
            raise ConfigError(f"Cannot read configuration {path}: {str(e)}")
        logger.info(f"Loaded configuration from {path}")
        return cls.parse(text)

    def validate(self):
        if self.eps not in ('1', 'i'):
            raise ConfigError(f"eps must be '1' or 'i', got {self.eps!r}")
        if self.a2 <= 0:
            raise ConfigError(f"a2 must be positive, got {self.a2}")
        for key in INT_KEYS:
            if getattr(self, key) < MIN_NODES:
                raise ConfigError(f"{key} must be at least {MIN_NODES}, got {getattr(self, key)}")
        for low, high in (('t1_min', 't1_max'), ('t2_min', 't2_max'), ('r_min', 'r_max')):
            if getattr(self, low) >= getattr(self, high):
                raise ConfigError(f"{low} must be smaller than {high}")
        for key in ('tol', 'stencil_tol'):
            value = getattr(self, key)
            if value is not None and value <= 0:
                raise ConfigError(f"{key} must be positive, got {value}")


def _real(value):
    # Env.float strips exponents
    return float(value)


def _read_pairs(text):
    """key = value lines into a dict; blank lines and # comments are skipped."""
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        key, sep, value = line.partition('=')
        key = key.strip()
        if not sep or not key.isidentifier():
            raise ConfigError(f"Line {number} is not a key = value pair: {raw!r}")
        lines.append(f"{key}={value.strip()}")

    values = {}
    reader = type('NetConfigEnv', (Env,), {'ENVIRON': values})
    reader.read_env(io.StringIO('\n'.join(lines)), overwrite=True, parse_comments=True)
    return values
