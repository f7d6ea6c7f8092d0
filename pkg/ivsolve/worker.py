"""
Bench worker: pops queued cells, runs them and records the outcome on SolveRun
"""
import logging
import time

from django.core.exceptions import ValidationError
from django.utils import timezone

from .bench import BenchCell, run_cell
from .conf import get_setting
from .models import SolveLog, SolveRun
from .queue_manager import get_next_cell, mark_cell_completed, mark_cell_failed
from .serializers import BenchJobSerializer

logger = logging.getLogger(__name__)


class CellRunner:
    """
    Runs one queued bench cell
    """

    def __init__(self, job):
        self.job = job
        self.run_id = job.get('run_id')

    def log(self, message, level='INFO'):
        logger.log(getattr(logging, level), message)
        try:
            run = SolveRun.objects.get(id=self.run_id)
            SolveLog.objects.create(run=run, level=level, message=message)
        except (SolveRun.DoesNotExist, ValidationError, ValueError):
            pass

    def _load_run(self, data):
        run, created = SolveRun.objects.get_or_create(
            id=data['run_id'],
            defaults={
                'source': 'queue',
                'suite': data['suite'],
                'cell': data['label'],
                'model_name': data['model'],
                'n': data['n'],
                'method': data['method'],
            },
        )
        if created:
            logger.info(f"✓ Created SolveRun: {run.id}")
        run.status = 'processing'
        run.started_at = timezone.now()
        run.save()
        return run

    def process(self):
        serializer = BenchJobSerializer(data=self.job)
        if not serializer.is_valid():
            message = f"Invalid bench job: {serializer.errors}"
            logger.error(f"✗ {message}")
            mark_cell_failed(self.job, message)
            return False

        data = serializer.validated_data
        try:
            run = self._load_run(data)
            cell = BenchCell.from_job(data)
            self.log(f"Running {cell.suite}:{cell.name} ({cell.model} n={cell.n}, {cell.setting_label})")
            cfg = cell.config(max_boxes=data['max_boxes'], seed=data['seed'])
            run.config = cfg.as_dict()

            result = run_cell(cell, max_boxes=data['max_boxes'], seed=data['seed'])
            report = result.report
            run.record_report(report)
            run.save()

            mark_cell_completed(self.job, status=run.status, N_proc=report.N_proc, N_keep=report.N_keep)
            if report.budget_exceeded:
                self.log(f"⚠ Budget exceeded after {report.N_proc} boxes", 'WARNING')
            else:
                self.log(f"✓ Cell finished: N_proc={report.N_proc} N_keep={report.N_keep}")
            return True
        except Exception as e:
            self.log(f"✗ Cell failed: {str(e)}", 'ERROR')
            SolveRun.objects.filter(id=data['run_id']).update(
                status='failed', error_message=str(e), completed_at=timezone.now(),
            )
            mark_cell_failed(self.job, str(e))
            return False


def run_worker(poll_interval=None, burst=False):
    """
    Poll the bench queue until interrupted; with ``burst`` stop once it is empty.

    Returns the number of cells processed.
    """
    logger.info("=" * 60)
    logger.info("ivsolve Bench Worker Started")
    logger.info("=" * 60)

    if poll_interval is None:
        poll_interval = int(get_setting('IVSOLVE_POLL_INTERVAL'))
    processed = 0

    while True:
        try:
            job = get_next_cell()
            if job:
                logger.info(f"Processing cell: {job.get('suite')}:{job.get('label')} ({job.get('method')})")
                CellRunner(job).process()
                processed += 1
            elif burst:
                break
            else:
                time.sleep(poll_interval)
        except KeyboardInterrupt:
            logger.info("✓ Worker stopped by user")
            break
    return processed
