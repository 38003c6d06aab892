# Generated by Django 5.2.7 on 2026-10-17 09:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="EstimateRecord",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                (
                    "estimator",
                    models.CharField(
                        choices=[
                            ("H1", "Constant (Erdos-Renyi) plug-in"),
                            ("H2", "Separable (configuration) plug-in"),
                            ("H3", "Stochastic block model (network histogram)"),
                            ("H4", "Low rank (singular value thresholding)"),
                        ],
                        max_length=2,
                    ),
                ),
                ("n", models.PositiveIntegerField(help_text="Number of nodes")),
                ("rho_hat", models.FloatField(help_text="Edge density")),
                ("value", models.FloatField(help_text="Entropy estimate in nats")),
                (
                    "variance",
                    models.FloatField(
                        blank=True, help_text="Asymptotic variance", null=True
                    ),
                ),
                ("degenerate", models.BooleanField(default=False)),
                (
                    "source",
                    models.CharField(
                        blank=True,
                        help_text="Edge list the estimate came from",
                        max_length=500,
                    ),
                ),
                ("created_at", models.DateTimeField(auto_now_add=True)),
            ],
            options={
                "ordering": ["-created_at", "estimator"],
                "indexes": [
                    models.Index(
                        fields=["estimator", "n"], name="estimate_estimator_n_idx"
                    )
                ],
            },
        ),
    ]
