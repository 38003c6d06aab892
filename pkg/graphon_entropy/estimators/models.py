"""
Registry of entropy estimates produced by the estimate command.
"""
from django.db import models

ESTIMATOR_CHOICES = [
    ('H1', 'Constant (Erdos-Renyi) plug-in'),
    ('H2', 'Separable (configuration) plug-in'),
    ('H3', 'Stochastic block model (network histogram)'),
    ('H4', 'Low rank (singular value thresholding)'),
]


class EstimateRecord(models.Model):
    """
    One entropy estimate of one observed graph.

    Values are in nats; ``variance`` is empty for estimators without an
    asymptotic variance formula.
    """
    estimator = models.CharField(max_length=2, choices=ESTIMATOR_CHOICES)
    n = models.PositiveIntegerField(help_text='Number of nodes')
    rho_hat = models.FloatField(help_text='Edge density')
    value = models.FloatField(help_text='Entropy estimate in nats')
    variance = models.FloatField(null=True, blank=True, help_text='Asymptotic variance')
    degenerate = models.BooleanField(default=False)
    source = models.CharField(max_length=500, blank=True, help_text='Edge list the estimate came from')
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at', 'estimator']
        indexes = [
            models.Index(fields=['estimator', 'n'], name='estimate_estimator_n_idx'),
        ]

    def __str__(self):
        return f"{self.estimator} n={self.n}: {self.value:.6f}"

    @classmethod
    def from_estimate(cls, estimate, source=''):
        return cls(
            estimator=estimate.estimator,
            n=estimate.n,
            rho_hat=estimate.rho_hat,
            value=estimate.value,
            variance=estimate.variance,
            degenerate=estimate.degenerate,
            source=str(source),
        )
