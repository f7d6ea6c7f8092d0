import uuid

from django.db import models
from django.utils import timezone


class SolveRun(models.Model):
    """
    One solver run, from the CLI (``solve --record``) or from the bench queue
    """
    STATUS_CHOICES = [
        ('pending', 'Pending'),
        ('processing', 'Processing'),
        ('completed', 'Completed'),
        ('budget_exceeded', 'Budget exceeded'),
        ('failed', 'Failed'),
    ]
    SOURCE_CHOICES = [
        ('cli', 'Command line'),
        ('queue', 'Bench queue'),
    ]

    id = models.UUIDField(primary_key=True, default=uuid.uuid4, editable=False)
    source = models.CharField(max_length=10, choices=SOURCE_CHOICES, default='cli')
    suite = models.CharField(max_length=50, blank=True, default='')
    cell = models.CharField(max_length=100, blank=True, default='')

    # What was solved
    model_name = models.CharField(max_length=100)
    n = models.IntegerField()
    method = models.CharField(max_length=20)
    config = models.JSONField(default=dict)  # SolverConfig.as_dict()
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default='pending')

    # Outcome
    N_proc = models.BigIntegerField(null=True, blank=True)
    N_keep = models.BigIntegerField(null=True, blank=True)
    avg_iter = models.FloatField(null=True, blank=True)
    counters = models.JSONField(default=dict)
    peak_worklist = models.BigIntegerField(null=True, blank=True)
    peak_retained = models.BigIntegerField(null=True, blank=True)
    wall_time_s = models.FloatField(null=True, blank=True)

    error_message = models.TextField(null=True, blank=True)

    # Timestamps
    created_at = models.DateTimeField(auto_now_add=True)
    started_at = models.DateTimeField(null=True, blank=True)
    completed_at = models.DateTimeField(null=True, blank=True)
    updated_at = models.DateTimeField(auto_now=True)

    class Meta:
        ordering = ['-created_at']
        indexes = [
            models.Index(fields=['status'], name='ivsolve_run_status_idx'),
            models.Index(fields=['suite', 'cell'], name='ivsolve_run_suite_cell_idx'),
            models.Index(fields=['created_at'], name='ivsolve_run_created_at_idx'),
        ]

    def __str__(self):
        return f"SolveRun {self.id} - {self.method}/{self.model_name} - {self.status}"

    def record_report(self, report):
        """Copy a RunReport onto the row and set the terminal status (not saved)."""
        self.N_proc = report.N_proc
        self.N_keep = report.N_keep
        self.avg_iter = report.avg_iter
        self.counters = report.counters.as_dict()
        self.peak_worklist = report.peak_worklist
        self.peak_retained = report.peak_retained
        self.wall_time_s = report.wall_time_s
        self.status = 'budget_exceeded' if report.budget_exceeded else 'completed'
        self.completed_at = timezone.now()


class SolveLog(models.Model):
    """
    Log lines attached to a run
    """
    LOG_LEVEL_CHOICES = [
        ('INFO', 'Info'),
        ('WARNING', 'Warning'),
        ('ERROR', 'Error'),
        ('DEBUG', 'Debug'),
    ]

    id = models.UUIDField(primary_key=True, default=uuid.uuid4, editable=False)
    run = models.ForeignKey(SolveRun, on_delete=models.CASCADE, related_name='logs')
    level = models.CharField(max_length=10, choices=LOG_LEVEL_CHOICES, default='INFO')
    message = models.TextField()
    timestamp = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['timestamp']

    def __str__(self):
        return f"[{self.level}] {self.run.id}: {self.message[:50]}"
