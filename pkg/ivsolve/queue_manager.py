"""
Redis queue for bench cells run by worker processes
"""
import json
import logging

import redis

from .conf import get_setting

logger = logging.getLogger(__name__)

# Queue names
BENCH_QUEUE = 'ivsolve_bench_queue'
BENCH_PROCESSING = 'ivsolve_bench_processing'
BENCH_COMPLETED = 'ivsolve_bench_completed'
BENCH_FAILED = 'ivsolve_bench_failed'

_client = None


def get_redis_client():
    """
    Shared client built from REDIS_URL / REDIS_DB (no connection is opened until first use)
    """
    global _client
    if _client is None:
        _client = redis.from_url(
            get_setting('REDIS_URL'), db=int(get_setting('REDIS_DB')), decode_responses=True,
        )
    return _client


def set_redis_client(client):
    """Replace the shared client (tests pass a mock)."""
    global _client
    _client = client


def _dump(job):
    return json.dumps(job, sort_keys=True)


def enqueue_cell(run_id, cell, max_boxes=None, seed=0):
    """
    Add one bench cell to the queue

    Args:
        run_id: UUID of the pending SolveRun row for this cell
        cell: BenchCell to run
        max_boxes: Optional safety cap for the run
        seed: RNG seed recorded with the run

    Returns:
        bool: True if the cell was queued successfully
    """
    job = dict(cell.as_job(), run_id=str(run_id), max_boxes=max_boxes, seed=seed)
    try:
        get_redis_client().rpush(BENCH_QUEUE, _dump(job))
        logger.info(f"✓ Cell {cell.suite}:{cell.name} queued as run {run_id}")
        return True
    except redis.RedisError as e:
        logger.error(f"✗ Error queueing cell {cell.suite}:{cell.name}: {str(e)}")
        return False


def get_next_cell():
    """
    Pop the next bench cell and park it on the processing list

    Returns:
        dict: Job data or None if the queue is empty or unreachable
    """
    client = get_redis_client()
    try:
        raw = client.lpop(BENCH_QUEUE)
        if raw:
            client.rpush(BENCH_PROCESSING, raw)
            return json.loads(raw)
        return None
    except (redis.RedisError, json.JSONDecodeError) as e:
        logger.error(f"Error getting cell from queue: {str(e)}")
        return None


def _finish(job, target, entry):
    client = get_redis_client()
    client.lrem(BENCH_PROCESSING, 1, _dump(job))
    client.rpush(target, json.dumps(entry))


def mark_cell_completed(job, status='completed', N_proc=None, N_keep=None):
    """
    Move a cell from the processing list to the completed list

    Args:
        job: Job data as returned by get_next_cell
        status: 'completed' or 'budget_exceeded'
    """
    try:
        _finish(job, BENCH_COMPLETED, {
            'run_id': job['run_id'], 'suite': job['suite'], 'label': job['label'],
            'method': job['method'], 'status': status, 'N_proc': N_proc, 'N_keep': N_keep,
        })
        logger.info(f"✓ Run {job['run_id']} marked as {status}")
    except redis.RedisError as e:
        logger.error(f"Error marking run as completed: {str(e)}")


def mark_cell_failed(job, error_message):
    """
    Move a cell from the processing list to the failed list

    Args:
        job: Job data as returned by get_next_cell
        error_message: Error description
    """
    try:
        _finish(job, BENCH_FAILED, {
            'run_id': job.get('run_id'), 'suite': job.get('suite'), 'label': job.get('label'),
            'error': error_message,
        })
        logger.error(f"✗ Run {job.get('run_id')} marked as failed: {error_message}")
    except redis.RedisError as e:
        logger.error(f"Error marking run as failed: {str(e)}")


def get_queue_stats():
    """
    Get statistics about queue status

    Returns:
        dict: Queue statistics
    """
    client = get_redis_client()
    try:
        pending = client.llen(BENCH_QUEUE)
        processing = client.llen(BENCH_PROCESSING)
        completed = client.llen(BENCH_COMPLETED)
        failed = client.llen(BENCH_FAILED)

        return {
            'pending_cells': pending,
            'processing_cells': processing,
            'completed_cells': completed,
            'failed_cells': failed,
            'total_cells': pending + processing + completed + failed,
        }
    except redis.RedisError as e:
        return {
            'error': str(e),
        }


def clear_queue(queue_name=BENCH_QUEUE):
    try:
        get_redis_client().delete(queue_name)
        logger.info(f"✓ Queue {queue_name} cleared")
        return True
    except redis.RedisError as e:
        logger.error(f"Error clearing queue: {str(e)}")
        return False


def test_redis_connection():
    """
    Test Redis connection

    Returns:
        bool: True if connection successful
    """
    try:
        get_redis_client().ping()
        logger.info("✓ Redis connection successful")
        return True
    except redis.RedisError as e:
        logger.error(f"✗ Redis connection failed: {str(e)}")
        return False
