import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd

from data_handler import SWEEP_PARAMS, _parse_complex, load_scenario_config, preset_config
from models import (
    AmplitudeSolverModel,
    CatStateModel,
    DiscreteBathModel,
    MasterEquationCoefficientsModel,
    SpectralKernelModel,
)
from models.errors import ConfigError, DecoherenceError, ParameterError, SolverStabilityError
from results_analyzer import DecoherenceResultsAnalyzer, _to_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_UNSTABLE = 3
EXIT_VALIDATION = 4
SUMMARY_COLUMNS = ['value', 'min_purity', 'steady_gamma', 'steady_abs_u', 'status']


@dataclass(frozen=True, eq=False)
class ScenarioResult:
    config: object
    series: object
    coeffs: object
    purity: np.ndarray
    markovian: object = None
    markovian_coeffs: object = None
    bound_state: object = None
    oracle: object = None


class DecoherenceSimulation:
    """Runs one scenario through every component model."""
    def __init__(self, config):
        """
        Initialize the component models for a scenario.

        Args:
            config (ScenarioConfig): Resolved scenario, e.g. from
                                     data_handler.load_scenario_config or preset_config.
        """
        logger.info("Initializing decoherence simulation '%s'...", config.seed_label or 'scenario')
        self.config = config
        model_config = config.model_config()
        self.spectral = SpectralKernelModel(model_config)
        self.solver = AmplitudeSolverModel(model_config)
        self.coefficients = MasterEquationCoefficientsModel(model_config)
        self.cat = CatStateModel(model_config)
        self.oracle = DiscreteBathModel(model_config) if config.oracle is not None else None

    def run(self):
        """Solve the amplitude, extract the rates and evolve the cat state."""
        config = self.config
        series = self.solver.solve(self.spectral.kernel())
        coeffs = self.coefficients.extract(series)
        purity = self.cat.purity_series(series)

        markovian_coeffs = self.spectral.markovian_coefficients()
        markovian = self.solver.markovian(config.spectral, markovian_coeffs)
        bound = self.spectral.bound_state()
        if bound.exists:
            logger.info("Bound state below the continuum: E=%.6g, long-time |u| -> %.6g",
                        bound.frequency, bound.residue)

        oracle_run = None
        if self.oracle is not None:
            bath = self.oracle.build(config.spectral, horizon=config.grid.t_max)
            oracle_run = self.oracle.amplitude(bath, config.grid)
            logger.info("Oracle agreement: max |u - u_oracle| = %.3g",
                        float(np.max(np.abs(oracle_run.series.u - series.u))))
        return ScenarioResult(config=config, series=series, coeffs=coeffs, purity=purity,
                              markovian=markovian, markovian_coeffs=markovian_coeffs,
                              bound_state=bound, oracle=oracle_run)


def run_scenario(config, out_dir, svg=False, report=False):
    """Simulate one scenario and write its CSVs (plus SVGs / report.html on request)."""
    result = DecoherenceSimulation(config).run()
    analyzer = DecoherenceResultsAnalyzer(result)
    analyzer.write_csv(out_dir)
    if svg:
        analyzer.plot_svg(out_dir)
    if report:
        analyzer.generate_html_report(out_dir)
    return result


def _sweep_one(config, param, value, out_dir):
    directory = os.path.join(out_dir, f"{param}={value}")
    try:
        result = run_scenario(config.with_value(param, value), directory)
    except (DecoherenceError, OSError) as exc:
        logger.warning("Sweep point %s=%s failed: %s", param, value, exc)
        return {'value': value, 'min_purity': np.nan, 'steady_gamma': np.nan,
                'steady_abs_u': np.nan, 'status': type(exc).__name__}
    metrics = DecoherenceResultsAnalyzer(result).summary_metrics()
    return {'value': value, **metrics, 'status': 'ok'}


def sweep(config, param, values, out_dir, max_workers=None):
    """Run `config` once per value of `param` concurrently and write summary.csv.

    Failures of individual points are recorded in the status column.
    """
    if param not in SWEEP_PARAMS:
        raise ParameterError(f"cannot sweep {param!r}; choose one of {', '.join(SWEEP_PARAMS)}")
    values = list(values)
    if not values:
        raise ParameterError("sweep needs at least one value")
    logger.info("Sweeping %s over %d values...", param, len(values))
    os.makedirs(out_dir, exist_ok=True)
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        rows = list(pool.map(lambda value: _sweep_one(config, param, value, out_dir), values))
    summary = pd.DataFrame(rows, columns=SUMMARY_COLUMNS)
    if param == 'beta0':
        summary['value'] = [str(complex(value)) for value in summary['value']]
    else:
        summary['value'] = summary['value'].astype(float)
    _to_csv(summary, os.path.join(out_dir, 'summary.csv'))
    return summary


def _parse_values(text, param=None):
    """Comma-separated numbers; beta0 values are separated by ';', each 're' or 're,im'."""
    if param == 'beta0':
        return [_parse_complex(item, 'beta0') for item in text.split(';') if item.strip()]
    try:
        return [float(item) for item in text.split(',') if item.strip()]
    except ValueError as exc:
        raise ParameterError(f"--values must be comma-separated numbers: {exc}") from exc


def build_parser():
    parser = argparse.ArgumentParser(description="Exact non-Markovian decoherence of a single bosonic mode.")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true', help="debug logging")
    verbosity.add_argument('-q', '--quiet', action='store_true', help="warnings only")
    commands = parser.add_subparsers(dest='command', required=True)

    simulate = commands.add_parser('simulate', help="run one scenario file")
    simulate.add_argument('--config', required=True)
    simulate.add_argument('--out', required=True)
    simulate.add_argument('--svg', action='store_true')
    simulate.add_argument('--report', action='store_true')

    sweep_cmd = commands.add_parser('sweep', help="vary one parameter of a scenario")
    sweep_cmd.add_argument('--config', required=True)
    sweep_cmd.add_argument('--param', required=True, choices=SWEEP_PARAMS)
    sweep_cmd.add_argument('--values', required=True, help="comma-separated values; for beta0, ';'-separated re[,im] pairs")
    sweep_cmd.add_argument('--out', required=True)
    sweep_cmd.add_argument('--workers', type=int, default=None)

    validate = commands.add_parser('validate', help="run the acceptance criteria")
    validate.add_argument('--level', choices=('quick', 'full'), default='quick')
    validate.add_argument('--out', default=None, help="JSON report path")

    preset = commands.add_parser('preset', help="run a named preset")
    preset.add_argument('--name', required=True)
    preset.add_argument('--out', required=True)
    preset.add_argument('--svg', action='store_true')
    preset.add_argument('--report', action='store_true')
    return parser


def _configure_logging(args):
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')


def main(argv=None):
    args = build_parser().parse_args(argv)
    _configure_logging(args)
    try:
        if args.command == 'simulate':
            run_scenario(load_scenario_config(args.config), args.out, svg=args.svg, report=args.report)
        elif args.command == 'preset':
            run_scenario(preset_config(args.name), args.out, svg=args.svg, report=args.report)
        elif args.command == 'sweep':
            summary = sweep(load_scenario_config(args.config), args.param, _parse_values(args.values, args.param),
                            args.out, max_workers=args.workers)
            if (summary['status'] != 'ok').any():
                logger.warning("%d sweep points failed", int((summary['status'] != 'ok').sum()))
        elif args.command == 'validate':
            from validation_suite import run_validation
            report = run_validation(args.level)
            text = json.dumps(report, indent=2)
            if args.out:
                with open(args.out, 'w', encoding='utf-8') as handle:
                    handle.write(text + '\n')
            else:
                print(text)
            if not report['passed']:
                return EXIT_VALIDATION
    except (ConfigError, ParameterError, OSError) as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    except SolverStabilityError as exc:
        logger.error("%s", exc)
        return EXIT_UNSTABLE
    except DecoherenceError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
