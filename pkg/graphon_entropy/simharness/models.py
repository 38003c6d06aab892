"""
Registry of benchmark runs and their per-batch summaries.
"""
import math

from django.db import models

from estimators.models import ESTIMATOR_CHOICES

REGIME_CHOICES = [
    ('dense', 'Dense'),
    ('sparse', 'Sparse'),
]


class BenchmarkRun(models.Model):
    """One invocation of the benchmark command."""
    graphon = models.CharField(max_length=200, help_text='Graphon label or config path')
    regime = models.CharField(max_length=10, choices=REGIME_CHOICES, default='dense')
    n_values = models.JSONField(default=list, help_text='Node counts swept')
    trials = models.PositiveIntegerField()
    master_seed = models.BigIntegerField(default=0)
    options = models.JSONField(default=dict, blank=True, help_text='Estimator options used')
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at']

    def __str__(self):
        return f"{self.graphon} ({self.regime}) x{self.trials}"


class BatchSummary(models.Model):
    run = models.ForeignKey(BenchmarkRun, on_delete=models.CASCADE, related_name='summaries')
    estimator = models.CharField(max_length=2, choices=ESTIMATOR_CHOICES)
    n = models.PositiveIntegerField()
    rho_n = models.FloatField()
    truth = models.FloatField(help_text='Quadrature entropy in nats')
    trials = models.PositiveIntegerField(help_text='Trials that produced an estimate')
    failures = models.PositiveIntegerField(default=0)
    mean = models.FloatField(null=True)
    bias_squared = models.FloatField(null=True)
    variance = models.FloatField(null=True)
    rmse = models.FloatField(null=True)
    rmse_about_mean = models.FloatField(null=True)
    srmse = models.FloatField(null=True)

    class Meta:
        ordering = ['run', 'estimator', 'n']
        indexes = [
            models.Index(fields=['estimator', 'n'], name='summary_estimator_n_idx'),
        ]

    def __str__(self):
        return f"{self.estimator} n={self.n}: rmse={self.rmse}"

    @classmethod
    def from_batch(cls, run, batch):
        def finite(value):
            return None if math.isnan(value) else value
        return cls(
            run=run,
            estimator=batch.estimator_id,
            n=batch.n,
            rho_n=batch.rho_n,
            truth=batch.truth,
            trials=batch.trials,
            failures=batch.failures,
            mean=finite(batch.mean),
            bias_squared=finite(batch.bias_squared),
            variance=finite(batch.variance),
            rmse=finite(batch.rmse),
            rmse_about_mean=finite(batch.rmse_about_mean),
            srmse=finite(batch.srmse),
        )
