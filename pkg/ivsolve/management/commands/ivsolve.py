"""
python manage.py ivsolve <solve|bench|models|check|queue-status> [options]

Exit codes: 0 success, 1 input error or failed check, 2 solver budget exceeded
(the report is still written).
"""
import json
import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError
from django.db import transaction

from ivsolve import queue_manager
from ivsolve.bench import get_suite, run_suite, write_csv, write_json, write_run_csv, write_run_json
from ivsolve.checks import run_checks
from ivsolve.conf import get_setting
from ivsolve.exceptions import IvsolveError
from ivsolve.expressions import print_system
from ivsolve.models import SolveRun
from ivsolve.serializers import SolveRunSerializer
from ivsolve.solvers import Method, SolverConfig, solve
from ivsolve.systems import MODEL_REGISTRY, load_model

logger = logging.getLogger(__name__)

INPUT_ERROR = 1
BUDGET_EXCEEDED = 2


class Command(BaseCommand):
    help = 'Enclose all steady states of a nonlinear system, run reproduction suites and checks'

    def add_arguments(self, parser):
        sub = parser.add_subparsers(dest='subcommand', required=True)

        solve_p = sub.add_parser('solve', help='Run one solver on one model')
        solve_p.add_argument('--model', required=True, help='Built-in model name or model file path')
        solve_p.add_argument('--method', required=True, help=', '.join(m.value for m in Method))
        self._model_args(solve_p)
        solve_p.add_argument('--eps', type=float, default=None, help='Target box width epsilon')
        solve_p.add_argument('--m', type=int, default=None, help='Grid cells per axis')
        solve_p.add_argument('--nit', type=int, default=None, help='Per-box iteration cap (N_it)')
        solve_p.add_argument('--l', type=int, default=None, dest='l', help='ICP contractions per box')
        solve_p.add_argument('--max-boxes', type=int, default=None)
        solve_p.add_argument('--record', action='store_true', help='Persist the run as a SolveRun')
        self._output_args(solve_p, default_format='json')

        bench_p = sub.add_parser('bench', help='Run a named reproduction suite')
        bench_p.add_argument('suite')
        bench_p.add_argument('--allow-long', action='store_true', help='Also run cells with N_proc above 10^6')
        bench_p.add_argument('--repetitions', type=int, default=1)
        bench_p.add_argument('--max-boxes', type=int, default=None)
        bench_p.add_argument('--enqueue', action='store_true', help='Push the cells to the worker queue instead')
        self._output_args(bench_p, default_format='csv')

        models_p = sub.add_parser('models', help='List built-in models or print one in model-file form')
        models_p.add_argument('name', nargs='?')
        self._model_args(models_p)

        check_p = sub.add_parser('check', help='Run the fast invariant battery')
        check_p.add_argument('--seed', type=int, default=None)

        status_p = sub.add_parser('queue-status', help='Show bench queue statistics')
        status_p.add_argument('--runs', type=int, default=0, help='Also list the latest N recorded runs')

    def _model_args(self, parser):
        parser.add_argument('--n', type=int, default=None, help='Dimension for scalable models')
        parser.add_argument('--domain', type=float, nargs=2, metavar=('LO', 'HI'), default=None,
                            help='Replace X0 with [LO,HI]^n')

    def _output_args(self, parser, default_format):
        parser.add_argument('--format', choices=['csv', 'json'], default=default_format)
        parser.add_argument('--output', default=None, help='Report path (stdout when omitted)')
        parser.add_argument('--save', action='store_true', help='Write the report under IVSOLVE_REPORT_DIR')
        parser.add_argument('--include-boxes', action='store_true', help='JSON only: list retained boxes')
        parser.add_argument('--seed', type=int, default=None)

    def handle(self, *args, **options):
        handler = {
            'solve': self.handle_solve,
            'bench': self.handle_bench,
            'models': self.handle_models,
            'check': self.handle_check,
            'queue-status': self.handle_queue_status,
        }[options['subcommand']]
        try:
            handler(options)
        except IvsolveError as e:
            raise CommandError(str(e), returncode=INPUT_ERROR)

    # ==================== Helpers ====================

    def _seed(self, options):
        seed = options.get('seed')
        return int(get_setting('IVSOLVE_DEFAULT_SEED')) if seed is None else seed

    def _emit(self, text, options, default_name):
        if options.get('output'):
            path = Path(options['output'])
        elif options.get('save'):
            path = Path(get_setting('IVSOLVE_REPORT_DIR')) / f"{default_name}.{options['format']}"
        else:
            self.stdout.write(text, ending='' if text.endswith('\n') else '\n')
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding='utf-8')
        self.stderr.write(f"✓ Report written to {path}")

    def _config(self, options):
        method = Method.parse(options['method'])
        n_it = options['nit']
        if options['l'] is not None:
            if method != Method.ICP:
                raise CommandError('--l only applies to --method icp', returncode=INPUT_ERROR)
            if n_it is not None and n_it != options['l']:
                raise CommandError('--l and --nit disagree', returncode=INPUT_ERROR)
            n_it = options['l']
        settings = {'method': method, 'm': options['m'], 'n_it': n_it, 'seed': self._seed(options),
                    'max_boxes': options['max_boxes']}
        if options['eps'] is not None:
            settings['epsilon'] = options['eps']
        return SolverConfig(**settings)

    # ==================== Subcommands ====================

    def handle_solve(self, options):
        domain = tuple(options['domain']) if options['domain'] else None
        model = load_model(options['model'], n=options['n'], domain=domain)
        cfg = self._config(options)
        report = solve(model, cfg)

        if options['format'] == 'json':
            text = write_run_json(report, include_boxes=options['include_boxes'])
        else:
            text = write_run_csv(report)
        self._emit(text, options, f"{model.name}_{cfg.method.value}")

        if options['record']:
            run = SolveRun(source='cli', model_name=model.name, n=model.n, method=cfg.method.value,
                           config=cfg.as_dict())
            run.record_report(report)
            run.save()
            self.stderr.write(f"✓ Recorded run {run.id}")

        if report.budget_exceeded:
            raise CommandError(
                f"Budget exceeded after {report.N_proc} boxes (max_boxes={cfg.max_boxes})",
                returncode=BUDGET_EXCEEDED,
            )

    def handle_bench(self, options):
        suite = get_suite(options['suite'], repetitions=options['repetitions'])
        seed = self._seed(options)
        if options['enqueue']:
            self._enqueue(suite, options, seed)
            return

        outcome = run_suite(suite, allow_long=options['allow_long'], max_boxes=options['max_boxes'], seed=seed)
        if options['format'] == 'json':
            text = write_json(outcome, include_boxes=options['include_boxes'])
        else:
            text = write_csv(outcome.results)
        self._emit(text, options, suite.name)

        if outcome.budget_exceeded:
            raise CommandError('At least one cell exceeded its box budget', returncode=BUDGET_EXCEEDED)
        if outcome.failed:
            failed = ', '.join(r.cell.name for r in outcome.results if r.status == 'failed')
            raise CommandError(f"Failed cells: {failed}", returncode=INPUT_ERROR)

    def _enqueue(self, suite, options, seed):
        queued = 0
        for cell in suite.cells:
            if cell.long and not options['allow_long']:
                self.stderr.write(f"Skipping long cell {cell.name}")
                continue
            with transaction.atomic():
                run = SolveRun.objects.create(
                    source='queue', suite=suite.name, cell=cell.label, model_name=cell.model,
                    n=cell.n, method=cell.method.value, status='pending',
                )
            if queue_manager.enqueue_cell(run.id, cell, max_boxes=options['max_boxes'], seed=seed):
                queued += 1
            else:
                run.status = 'failed'
                run.error_message = 'Could not reach the bench queue'
                run.save()
        self.stdout.write(f"✓ Queued {queued} of {len(suite.cells)} cells from {suite.name}")
        if queued == 0 and suite.cells:
            raise CommandError('No cell could be queued', returncode=INPUT_ERROR)

    def handle_models(self, options):
        if not options['name']:
            for name, factory in MODEL_REGISTRY.items():
                suffix = f" (n={factory.default_n} by default)" if factory.takes_n else ''
                self.stdout.write(f"{name:<12} {factory.description}{suffix}")
            return
        domain = tuple(options['domain']) if options['domain'] else None
        model = load_model(options['name'], n=options['n'], domain=domain)
        self.stdout.write(print_system(model), ending='')

    def handle_check(self, options):
        results = run_checks(seed=self._seed(options))
        for result in results:
            status = '✓' if result.passed else '✗'
            line = f"{status} {result.name}"
            if result.detail:
                line += f": {result.detail}"
            self.stdout.write(line)
        failed = [r.name for r in results if not r.passed]
        if failed:
            raise CommandError(f"Failed properties: {', '.join(failed)}", returncode=INPUT_ERROR)

    def handle_queue_status(self, options):
        data = {'queue': queue_manager.get_queue_stats()}
        if options['runs']:
            runs = SolveRun.objects.prefetch_related('logs')[:options['runs']]
            data['runs'] = SolveRunSerializer(runs, many=True).data
        self.stdout.write(json.dumps(data, indent=2, default=str))
