# Generated migration file
from django.db import migrations, models
import django.db.models.deletion
import uuid


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='SolveRun',
            fields=[
                ('id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False)),
                ('source', models.CharField(choices=[('cli', 'Command line'), ('queue', 'Bench queue')], default='cli', max_length=10)),
                ('suite', models.CharField(blank=True, default='', max_length=50)),
                ('cell', models.CharField(blank=True, default='', max_length=100)),
                ('model_name', models.CharField(max_length=100)),
                ('n', models.IntegerField()),
                ('method', models.CharField(max_length=20)),
                ('config', models.JSONField(default=dict)),
                ('status', models.CharField(choices=[('pending', 'Pending'), ('processing', 'Processing'), ('completed', 'Completed'), ('budget_exceeded', 'Budget exceeded'), ('failed', 'Failed')], default='pending', max_length=20)),
                ('N_proc', models.BigIntegerField(blank=True, null=True)),
                ('N_keep', models.BigIntegerField(blank=True, null=True)),
                ('avg_iter', models.FloatField(blank=True, null=True)),
                ('counters', models.JSONField(default=dict)),
                ('peak_worklist', models.BigIntegerField(blank=True, null=True)),
                ('peak_retained', models.BigIntegerField(blank=True, null=True)),
                ('wall_time_s', models.FloatField(blank=True, null=True)),
                ('error_message', models.TextField(blank=True, null=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('started_at', models.DateTimeField(blank=True, null=True)),
                ('completed_at', models.DateTimeField(blank=True, null=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
            ],
            options={
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='SolveLog',
            fields=[
                ('id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False)),
                ('level', models.CharField(choices=[('INFO', 'Info'), ('WARNING', 'Warning'), ('ERROR', 'Error'), ('DEBUG', 'Debug')], default='INFO', max_length=10)),
                ('message', models.TextField()),
                ('timestamp', models.DateTimeField(auto_now_add=True)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='logs', to='ivsolve.solverun')),
            ],
            options={
                'ordering': ['timestamp'],
            },
        ),
        migrations.AddIndex(
            model_name='solverun',
            index=models.Index(fields=['status'], name='ivsolve_run_status_idx'),
        ),
        migrations.AddIndex(
            model_name='solverun',
            index=models.Index(fields=['suite', 'cell'], name='ivsolve_run_suite_cell_idx'),
        ),
        migrations.AddIndex(
            model_name='solverun',
            index=models.Index(fields=['created_at'], name='ivsolve_run_created_at_idx'),
        ),
    ]
