# coding: utf-8
"""
Run analyses and experiment suites from configuration files.

Exit status is 0 on success, 1 on any error and 2 when a fitted exponent
leaves its acceptance band.
"""
import logging
import math
import sys
from argparse import ArgumentParser
from fractions import Fraction

import numpy as np
import pandas as pd
from path_helpers import path

from ..blowup import blowup_experiment
from ..bergman import S0, counterexample_series, leading_coefficient
from ..config import ConfigError, ExperimentConfig, load_config
from ..core import LabError, analysis_summary, analyze_domain
from ..estimator import (ExperimentReport, dyadic_family, polydisc_inequality_suite, restricted_ratio_suite,
                         weight_family)
from ..measure import fit_sublevel_exponents, max_norm, sublevel_volume, top_multiplicity

logger = logging.getLogger(__name__)

COMMANDS = ('analyze', 'volume', 'project', 'verify', 'blowup')

#: Relative band of the fitted s-power of sublevel volumes.
VOLUME_TOLERANCE = .02
#: Band of the trend slope of the uniform-boundedness suites.
TREND_TOLERANCE = .1
#: Band of the blow-up slope around ``p* - 1 - t``.
BLOWUP_TOLERANCE = .15

EXIT_OK, EXIT_ERROR, EXIT_ACCEPTANCE = 0, 1, 2


class _ArgumentParser(ArgumentParser):
    # Usage errors exit with status 1; status 2 is reserved for acceptance failures.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f'{self.prog}: error: {message}\n')


def parse_args(args=None):
    """Parse the command line and return the options namespace."""
    parser = _ArgumentParser(prog='bergman-lab',
                             description='Exact invariants, projections and estimate experiments for '
                                         'monomial polyhedra.')
    parser.add_argument('command', choices=COMMANDS)
    parser.add_argument('--config', type=path, required=True, help='JSON configuration file')
    parser.add_argument('--out', type=path, default=None,
                        help='Output directory (default: config "output", then $BERGMAN_LAB_OUTPUT_DIR, then .)')
    parser.add_argument('--seed', type=int, default=None, help='Master seed (overrides the config)')
    parser.add_argument('--samples', type=int, default=None, help='Sample count (overrides the config)')
    parser.add_argument('-v', '--verbose', action='store_true')
    options = parser.parse_args(args)
    if options.seed is not None and options.seed < 0:
        parser.error('--seed must be nonnegative.')
    if options.samples is not None and options.samples < 1:
        parser.error('--samples must be positive.')
    return options


def _require(config: ExperimentConfig, name: str):
    value = getattr(config, name)
    if value is None or (isinstance(value, list) and not value):
        raise ConfigError('required by this command', config.source, field=name)
    return value


def _write_report(report: ExperimentReport, output_dir: path, name: str) -> path:
    output_dir.makedirs_p()
    output_path = output_dir.joinpath(name)
    report.to_csv(str(output_path))
    print(f'Wrote {output_path}')
    return output_path


def _float_or_none(value):
    return None if value is None else float(value)


def cmd_analyze(config: ExperimentConfig, output_dir: path) -> int:
    analysis = analyze_domain(_require(config, 'B'))
    output_dir.makedirs_p()
    output_path = output_dir.joinpath('analysis.json')
    output_path.write_text(analysis.to_json(indent=2) + '\n')
    print(analysis_summary(analysis))
    print(f'Wrote {output_path}')
    return EXIT_OK


def cmd_volume(config: ExperimentConfig, output_dir: path) -> int:
    alpha = _require(config, 'alpha')
    s_values = [float(s) for s in _require(config, 's_grid')]
    power = 2 / float(max_norm(alpha))
    log_power = top_multiplicity(alpha) - 1
    volumes = [sublevel_volume(alpha, s) for s in s_values]
    rows = pd.DataFrame({'s': s_values, 'volume': volumes,
                         'normalized': [v / (s ** power * math.log(1 / s) ** log_power)
                                        for s, v in zip(s_values, volumes)]})
    fit = fit_sublevel_exponents(alpha, s_values) if len(s_values) >= 2 else {}
    comment = (f'sublevel volumes |{{rho_alpha < s}}|, alpha = {[str(a) for a in alpha]}; normalized = '
               f'volume / (s^(2/|alpha|) log(1/s)^(m-1))\ncolumns: s, volume, normalized')
    _write_report(ExperimentReport(rows, fit, comment), output_dir, 'volume.csv')
    if fit:
        print(f's-exponent {fit["s_exponent"]:.6g} (expected {power:.6g}), '
              f'log-exponent {fit["log_exponent"]:.6g} (expected {log_power})')
        if abs(fit['s_exponent'] - power) > VOLUME_TOLERANCE * power:
            return EXIT_ACCEPTANCE
    return EXIT_OK


def cmd_project(config: ExperimentConfig, output_dir: path) -> int:
    analysis = analyze_domain(_require(config, 'B'))
    b = _require(config, 'b')
    s = float(config.s if config.s is not None else S0)
    series = counterexample_series(analysis, b, s, config.truncation).nonzero()
    output_dir.makedirs_p()
    output_path = output_dir.joinpath('coefficients.csv')
    with open(output_path, 'w', newline='') as output:
        series.to_csv(output, drop_zeros=True)
    leading = leading_coefficient(analysis, b, s)
    print(f'h_s at s = {s:.6g}: {len(series)} nonzero coefficients up to degree {config.truncation}; '
          f'|a_(b-1)| = {abs(leading):.12g}')
    print(f'Wrote {output_path}')
    return EXIT_OK


def _family(config: ExperimentConfig):
    if config.family is None:
        return None
    return list(range(config.family[0], config.family[1] + 1))


def cmd_verify(config: ExperimentConfig, output_dir: path) -> int:
    ks = _family(config)
    parameters = None if ks is None else ks
    if config.suite == 'restricted':
        analysis = analyze_domain(_require(config, 'B'))
        sets = weight_family(analysis, ks) if ks is not None else config.sets
        labels = None if ks is None else [f'k={k}' for k in ks]
        report = restricted_ratio_suite(analysis, sets, config.samples, config.seed, p=config.p,
                                        parameters=parameters, labels=labels, workers=config.workers)
    else:
        alpha = _require(config, 'alpha')
        sets = dyadic_family(alpha, ks) if ks is not None else config.sets
        labels = None if ks is None else [f'k={k}' for k in ks]
        report = polydisc_inequality_suite(alpha, sets, p=config.p, mode=config.mode, samples=config.samples,
                                           seed=config.seed, t=config.t, epsilon=_float_or_none(config.epsilon),
                                           parameters=parameters, labels=labels, workers=config.workers)
    _write_report(report, output_dir, 'verify.csv')
    slope = report.fit.get('slope')
    if slope is not None:
        print(f'trend slope {slope:.6g}, max ratio {report.fit["max_ratio"]:.6g}, '
              f'median ratio {report.fit["median_ratio"]:.6g}')
        if not abs(slope) <= TREND_TOLERANCE:
            return EXIT_ACCEPTANCE
    return EXIT_OK


def cmd_blowup(config: ExperimentConfig, output_dir: path) -> int:
    analysis = analyze_domain(_require(config, 'B'))
    b = _require(config, 'b')
    s_grid = config.s_grid or [Fraction(1, 2 ** k) for k in range(4, 17)]
    result = blowup_experiment(analysis, b, [float(s) for s in s_grid], config.truncation, config.samples,
                               config.seed, float(config.log_power), _float_or_none(config.fit_s), config.workers)
    _write_report(result.report(), output_dir, 'blowup.csv')
    print(f'slope {result.slope:.6g} (expected {result.expected_slope:.6g}), K = {result.K:.6g}')
    if not np.isfinite(result.slope) or abs(result.slope - result.expected_slope) > BLOWUP_TOLERANCE:
        return EXIT_ACCEPTANCE
    return EXIT_OK


HANDLERS = {'analyze': cmd_analyze, 'volume': cmd_volume, 'project': cmd_project, 'verify': cmd_verify,
            'blowup': cmd_blowup}


def main(args=None) -> int:
    options = parse_args(args)
    logging.basicConfig(level=logging.INFO if options.verbose else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        config = load_config(options.config)
        if options.seed is not None:
            config.seed = options.seed
        if options.samples is not None:
            config.samples = options.samples
        return HANDLERS[options.command](config, config.output_dir(options.out))
    except (LabError, OSError) as exception:
        print(f'error: {exception}', file=sys.stderr)
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
