'''
Commands registered on the application's command group:

    bounds N D Q P
    analyze WEBFILE
    verify WEBFILE RELATIONFILE [COBORDFILE]
    curvature WEBFILE
    bracket-check WEBFILE I J

Reports are printed as YAML text or, with --json, as sorted JSON; --out writes
them to a file instead. Exit codes: 0 ok, 1 invalid input or unmet
precondition, 2 negative verdict, 3 parse error.
'''

import json
import logging
from functools import wraps

import click
import yaml
from flask import current_app

from main import app
from models.errors import WebRankError, ParseError
from models.webmodel import load_web, validate, bracket_test
from models.relations import load_relation
from controllers.combinat import bound_profile
from controllers.helpers import RunConfig, parse_point, point_text, sample_points
from controllers.analysis import (bound_report, rank_profile, verify_relation,
                                  verify_cobord)
from controllers.connection import build_connection, flatness_verdict, CLOSED, PLAIN

logger = logging.getLogger('SystemLogger.commands')

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NEGATIVE = 2
EXIT_PARSE = 3


class ReportCommand(click.Command):
    '''A command whose usage errors (missing files, bad arguments) exit with EXIT_INVALID.'''

    def make_context(self, *args, **kwargs):
        try:
            return super().make_context(*args, **kwargs)
        except click.UsageError as error:
            error.exit_code = EXIT_INVALID
            raise


def reports_errors(f):
    '''Turn package errors into the exit-code contract.'''
    @wraps(f)
    def decorated_function(*args, **kwargs):
        context = click.get_current_context()
        try:
            code = f(*args, **kwargs)
        except ParseError as error:
            click.echo('parse error: {}'.format(error), err=True)
            context.exit(EXIT_PARSE)
        except (WebRankError, OSError) as error:
            click.echo('error: {}'.format(error), err=True)
            context.exit(EXIT_INVALID)
        context.exit(code or EXIT_OK)
    return decorated_function


def analysis_options(f):
    options = [
        click.option('--p', 'p', type=int, default=1, show_default=True, help='Form degree.'),
        click.option('--max-order', type=int, default=None, help='Also report the rank profile up to this order.'),
        click.option('--closed', is_flag=True, help='Use the closed (strong) jet system.'),
        click.option('--backend', type=click.Choice(['auto', 'exact', 'bigfloat']), default='auto',
                     show_default=True),
        click.option('--precision', type=int, default=None, help='Digits for the bigfloat backend.'),
        click.option('--points', type=int, default=None, help='Number of sample points.'),
        click.option('--point', 'explicit', multiple=True, help='Explicit point, e.g. "x=1/3,y=2,z=0".'),
        click.option('--seed', type=int, default=None),
        click.option('--json', 'as_json', is_flag=True, help='Emit JSON.'),
        click.option('--out', type=click.Path(dir_okay=False), default=None, help='Write the report here.'),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def run_config(command, web=None, explicit=(), as_json=False, **values):
    points = tuple(parse_point(text, web) for text in explicit) if web is not None else ()
    return RunConfig.from_app_config(current_app.config, command=command,
                                     explicit_points=points,
                                     output_format='json' if as_json else 'text',
                                     **values)


def emit(report, config, out):
    if config.output_format == 'json':
        text = json.dumps(report, sort_keys=True, indent=2)
    else:
        text = yaml.safe_dump(report, sort_keys=True, default_flow_style=False)
    if out:
        with open(out, 'w') as report_file:
            report_file.write(text + '\n')
    else:
        click.echo(text)


@app.cli.command('bounds', cls=ReportCommand)
@click.argument('n', type=int)
@click.argument('d', type=int)
@click.argument('q', type=int)
@click.argument('p', type=int)
@click.option('--json', 'as_json', is_flag=True, help='Emit JSON.')
@click.option('--out', type=click.Path(dir_okay=False), default=None)
@reports_errors
def bounds(n, d, q, p, as_json, out):
    '''Thresholds, rank bounds and calibration of (n, d, q, p).'''
    config = run_config('bounds', as_json=as_json, p=p)
    emit(bound_profile(n, d, q, p).to_dict(), config, out)
    return EXIT_OK


@app.cli.command('analyze', cls=ReportCommand)
@click.argument('webfile', type=click.Path(dir_okay=False))
@analysis_options
@click.option('--expect-ordinary', is_flag=True, help='Exit 2 unless the web is ordinary.')
@reports_errors
def analyze(webfile, p, max_order, closed, backend, precision, points, explicit, seed,
            as_json, out, expect_ordinary):
    '''Rank profile, ordinarity verdicts and rank bounds of a web.'''
    web = load_web(webfile)
    config = run_config('analyze', web, explicit, as_json, inputs=(webfile,), p=p,
                        max_order=max_order, closed=closed, backend=backend,
                        precision=precision, points=points, seed=seed)
    chosen = sample_points(web, config)
    validation = validate(web, chosen, config.precision, config.tolerance)
    if not validation.valid:
        raise WebRankError('web {} fails validation: {}'.format(web.name, validation.failures))
    summary = bound_report(web, p, config, chosen)
    report = {'web': web.name, 'validation': validation.to_dict(), 'bounds': summary.to_dict()}
    if max_order is not None:
        records, used = rank_profile(web, p, max_order, closed, config, chosen)
        report['profile'] = {'closed': closed, 'points': [point_text(point) for point in used],
                             'orders': [record.to_dict() for record in records]}
    emit(report, config, out)
    verdict = summary.strong if closed else summary.plain
    if expect_ordinary and not verdict.ordinary:
        return EXIT_NEGATIVE
    return EXIT_OK


@app.cli.command('verify', cls=ReportCommand)
@click.argument('webfile', type=click.Path(dir_okay=False))
@click.argument('relationfile', type=click.Path(dir_okay=False))
@click.argument('cobordfile', type=click.Path(dir_okay=False), required=False)
@click.option('--precision', type=int, default=None)
@click.option('--seed', type=int, default=None)
@click.option('--point', 'explicit', multiple=True)
@click.option('--json', 'as_json', is_flag=True)
@click.option('--out', type=click.Path(dir_okay=False), default=None)
@reports_errors
def verify(webfile, relationfile, cobordfile, precision, seed, explicit, as_json, out):
    '''
    Check that RELATIONFILE is an abelian relation of the web; with
    COBORDFILE, also check that it is the exterior derivative of that relation.
    '''
    web = load_web(webfile)
    config = run_config('verify', web, explicit, as_json,
                        inputs=tuple(path for path in (webfile, relationfile, cobordfile) if path),
                        precision=precision, seed=seed)
    relation = load_relation(relationfile, web)
    if cobordfile:
        eta = load_relation(cobordfile, web)
        verdict = verify_cobord(web, eta, relation, config)
        passed = verdict.is_cobord and verdict.omega.is_closed
        report = {'web': web.name, 'cobord': verdict.to_dict(), 'passed': passed}
    else:
        verdict = verify_relation(web, relation, config)
        passed = verdict.is_abelian
        report = {'web': web.name, 'relation': verdict.to_dict(), 'passed': passed}
    emit(report, config, out)
    return EXIT_OK if passed else EXIT_NEGATIVE


@app.cli.command('curvature', cls=ReportCommand)
@click.argument('webfile', type=click.Path(dir_okay=False))
@click.option('--p', 'p', type=int, default=None, help='Form degree (default: the codimension).')
@click.option('--closed/--plain', default=None, help='Variant; closed when p equals the codimension.')
@click.option('--json', 'as_json', is_flag=True)
@click.option('--out', type=click.Path(dir_okay=False), default=None)
@reports_errors
def curvature(webfile, p, closed, as_json, out):
    '''
    Tautological connection and curvature of a calibrated ordinary web. Exits 2
    unless the curvature is shown to vanish; a web with transcendental
    generators is only sampled, so its flatness stays undetermined.
    '''
    web = load_web(webfile)
    p = web.q if p is None else p
    if closed is None:
        closed = p == web.q
    config = run_config('curvature', web, (), as_json, inputs=(webfile,), p=p, closed=closed)
    data = build_connection(web, p, CLOSED if closed else PLAIN, config=config)
    report = data.to_dict()
    report.update(flatness_verdict(data))
    emit(report, config, out)
    return EXIT_OK if data.flat is True else EXIT_NEGATIVE


@app.cli.command('bracket-check', cls=ReportCommand)
@click.argument('webfile', type=click.Path(dir_okay=False))
@click.argument('i', type=int)
@click.argument('j', type=int)
@click.option('--json', 'as_json', is_flag=True)
@reports_errors
def bracket_check(webfile, i, j, as_json):
    '''Whether [X_I, X_J] lies in the span of X_I and X_J (curve webs only).'''
    web = load_web(webfile)
    if not (1 <= i <= web.d and 1 <= j <= web.d):
        raise WebRankError('foliation indices must lie between 1 and {}'.format(web.d))
    config = run_config('bracket-check', web, (), as_json, inputs=(webfile,))
    points = None if web.is_rational() else sample_points(web, config)
    holds = bracket_test(web, i - 1, j - 1, points, config.precision, config.tolerance)
    emit({'web': web.name, 'foliations': [i, j], 'bracket_in_span': holds}, config, None)
    return EXIT_OK
