"""Scenario configuration: `key=value` files, named presets and the typed ScenarioConfig."""
import logging
from dataclasses import dataclass, field, replace

from models.discrete_bath import BathScheme
from models.errors import ConfigError, ParameterError
from models.spectral_kernel import DEFAULT_QUAD_NODES, KernelMode, SpectralParams
from models.volterra_solver import TimeGrid, default_dt

logger = logging.getLogger(__name__)

OUTPUT_KINDS = ('amplitude', 'rates', 'purity', 'markovian')
DEFAULT_OUTPUTS = ('amplitude', 'rates', 'purity')
SWEEP_PARAMS = ('eta', 'omega_c', 'n', 'beta0')

_FLOAT_KEYS = ('eta', 'omega_c', 'n', 'omega_0', 't_max', 'dt', 'epsilon_u', 'oracle_omega_max')
_INT_KEYS = ('oracle_modes', 'quad_nodes')
_TEXT_KEYS = ('outputs', 'kernel_mode', 'oracle_scheme', 'oracle_method', 'seed_label', 'beta0')
KNOWN_KEYS = frozenset(_FLOAT_KEYS + _INT_KEYS + _TEXT_KEYS)


@dataclass(frozen=True)
class OracleSettings:
    modes: int = 2000
    omega_max: float = None
    scheme: BathScheme = BathScheme.MIDPOINT
    method: str = 'rk4'


@dataclass(frozen=True)
class ScenarioConfig:
    """One fully resolved simulation scenario."""
    spectral: SpectralParams
    grid: TimeGrid
    beta0: complex = 1.0
    epsilon_u: float = 1e-6
    outputs: tuple = DEFAULT_OUTPUTS
    oracle: OracleSettings = None
    seed_label: str = ''
    kernel_mode: KernelMode = KernelMode.CLOSED_FORM
    quad_nodes: int = DEFAULT_QUAD_NODES
    raw: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def tau_E(self):
        return self.spectral.tau_E

    @property
    def tau_0(self):
        return self.spectral.tau_0

    def model_config(self):
        """Flat dict consumed by the component models."""
        config = {
            'eta': self.spectral.eta,
            'omega_c': self.spectral.omega_c,
            'n': self.spectral.n,
            'omega_0': self.spectral.omega_0,
            't_max': self.grid.t_max,
            'dt': self.grid.dt,
            'beta0': self.beta0,
            'epsilon_u': self.epsilon_u,
            'kernel_mode': self.kernel_mode.value,
            'quad_nodes': self.quad_nodes,
        }
        if self.oracle is not None:
            config.update({
                'oracle_modes': self.oracle.modes,
                'oracle_omega_max': self.oracle.omega_max,
                'oracle_scheme': self.oracle.scheme.value,
                'oracle_method': self.oracle.method,
            })
        return config

    def with_value(self, param, value):
        """Copy of this scenario with one swept parameter replaced."""
        if param == 'beta0':
            return replace(self, beta0=_parse_complex(str(value), 'beta0') if isinstance(value, str) else complex(value))
        if param not in ('eta', 'omega_c', 'n'):
            raise ParameterError(f"cannot sweep {param!r}; choose one of {', '.join(SWEEP_PARAMS)}")
        return replace(self, spectral=replace(self.spectral, **{param: float(value)}))


def _parse_complex(text, key):
    parts = [part.strip() for part in text.split(',')]
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise ConfigError(f"{key} must be 're' or 're,im', got {text!r}")


def _parse_pairs(text):
    pairs = {}
    for number, line in enumerate(text.splitlines(), start=1):
        content = line.split('#', 1)[0].strip()
        if not content:
            continue
        if '=' not in content:
            raise ConfigError(f"line {number}: expected key=value, got {line.strip()!r}")
        key, value = (part.strip() for part in content.split('=', 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {number}: unknown key {key!r}")
        if key in pairs:
            raise ConfigError(f"line {number}: duplicate key {key!r}")
        pairs[key] = value
    return pairs


def config_from_mapping(values):
    """Build a ScenarioConfig from raw key/value strings (or already typed values)."""
    unknown = set(values) - KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
    typed = {}
    try:
        for key in _FLOAT_KEYS:
            if key in values:
                typed[key] = float(values[key])
        for key in _INT_KEYS:
            if key in values:
                typed[key] = int(values[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed numeric value: {exc}") from exc

    beta0 = values.get('beta0', 1.0)
    beta0 = _parse_complex(beta0, 'beta0') if isinstance(beta0, str) else complex(beta0)

    outputs = values.get('outputs', DEFAULT_OUTPUTS)
    if isinstance(outputs, str):
        outputs = tuple(item.strip() for item in outputs.split(',') if item.strip())
    outputs = tuple(outputs)
    bad = [item for item in outputs if item not in OUTPUT_KINDS]
    if bad or not outputs:
        raise ConfigError(f"outputs must be a non-empty subset of {', '.join(OUTPUT_KINDS)}, got {outputs}")

    try:
        kernel_mode = KernelMode(values.get('kernel_mode', KernelMode.CLOSED_FORM.value))
        if kernel_mode is KernelMode.DISCRETE_SUM:
            raise ConfigError("kernel_mode must be closed_form or quadrature")
        spectral = SpectralParams(
            eta=typed.get('eta', 0.1),
            omega_c=typed.get('omega_c', 50.0),
            n=typed.get('n', 1.0),
            omega_0=typed.get('omega_0', 1.0),
        )
        dt = typed.get('dt', default_dt(spectral))
        grid = TimeGrid(t_max=typed.get('t_max', 10.0), dt=dt)
        oracle = None
        if 'oracle_modes' in typed:
            oracle = OracleSettings(
                modes=typed['oracle_modes'],
                omega_max=typed.get('oracle_omega_max'),
                scheme=BathScheme(values.get('oracle_scheme', BathScheme.MIDPOINT.value)),
                method=values.get('oracle_method', 'rk4'),
            )
            if oracle.method not in ('rk4', 'eigh'):
                raise ConfigError(f"oracle_method must be rk4 or eigh, got {oracle.method!r}")
        config = ScenarioConfig(
            spectral=spectral,
            grid=grid,
            beta0=beta0,
            epsilon_u=typed.get('epsilon_u', 1e-6),
            outputs=outputs,
            oracle=oracle,
            seed_label=str(values.get('seed_label', '')),
            kernel_mode=kernel_mode,
            quad_nodes=typed.get('quad_nodes', DEFAULT_QUAD_NODES),
            raw=dict(values),
        )
    except ParameterError as exc:
        raise ConfigError(f"invalid scenario: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"invalid scenario value: {exc}") from exc
    if config.epsilon_u <= 0:
        raise ConfigError(f"epsilon_u must be > 0, got {config.epsilon_u}")
    return config


def parse_config_text(text):
    return config_from_mapping(_parse_pairs(text))


def load_scenario_config(path):
    """Read a UTF-8 `key=value` scenario file.

    Raises:
        ConfigError: the file is not valid UTF-8 or does not describe a scenario.
        OSError: the file cannot be read.
    """
    logger.info("Loading scenario config from %s", path)
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            text = handle.read()
    except UnicodeDecodeError as exc:
        raise ConfigError(f"{path} is not UTF-8 text") from exc
    return parse_config_text(text)


PRESETS = {
    # Weak coupling, short environmental memory.
    'fig1': {'eta': 0.1, 'omega_c': 50.0, 'n': 1.0, 't_max': 20.0, 'dt': 2e-4,
             'beta0': 1.0, 'outputs': OUTPUT_KINDS, 'seed_label': 'fig1'},
    # Strong coupling, cutoff at resonance.
    'fig2': {'eta': 5.0, 'omega_c': 1.0, 'n': 1.0, 't_max': 50.0, 'dt': 5e-4,
             'beta0': 1.0, 'outputs': OUTPUT_KINDS, 'seed_label': 'fig2'},
    # Strong coupling, long environmental memory.
    'fig3': {'eta': 5.0, 'omega_c': 0.2, 'n': 1.0, 't_max': 100.0, 'dt': 1e-3,
             'beta0': 1.0, 'outputs': OUTPUT_KINDS, 'seed_label': 'fig3'},
}


def preset_config(name):
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose one of {', '.join(sorted(PRESETS))}")
    return config_from_mapping(PRESETS[name])
