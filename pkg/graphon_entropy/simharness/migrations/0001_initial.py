# Generated by Django 5.2.7 on 2026-10-17 09:40

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="BenchmarkRun",
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
                    "graphon",
                    models.CharField(
                        help_text="Graphon label or config path", max_length=200
                    ),
                ),
                (
                    "regime",
                    models.CharField(
                        choices=[("dense", "Dense"), ("sparse", "Sparse")],
                        default="dense",
                        max_length=10,
                    ),
                ),
                (
                    "n_values",
                    models.JSONField(default=list, help_text="Node counts swept"),
                ),
                ("trials", models.PositiveIntegerField()),
                ("master_seed", models.BigIntegerField(default=0)),
                (
                    "options",
                    models.JSONField(
                        blank=True, default=dict, help_text="Estimator options used"
                    ),
                ),
                ("created_at", models.DateTimeField(auto_now_add=True)),
            ],
            options={
                "ordering": ["-created_at"],
            },
        ),
        migrations.CreateModel(
            name="BatchSummary",
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
                ("n", models.PositiveIntegerField()),
                ("rho_n", models.FloatField()),
                (
                    "truth",
                    models.FloatField(help_text="Quadrature entropy in nats"),
                ),
                (
                    "trials",
                    models.PositiveIntegerField(
                        help_text="Trials that produced an estimate"
                    ),
                ),
                ("failures", models.PositiveIntegerField(default=0)),
                ("mean", models.FloatField(null=True)),
                ("bias_squared", models.FloatField(null=True)),
                ("variance", models.FloatField(null=True)),
                ("rmse", models.FloatField(null=True)),
                ("rmse_about_mean", models.FloatField(null=True)),
                ("srmse", models.FloatField(null=True)),
                (
                    "run",
                    models.ForeignKey(
                        on_delete=django.db.models.deletion.CASCADE,
                        related_name="summaries",
                        to="simharness.benchmarkrun",
                    ),
                ),
            ],
            options={
                "ordering": ["run", "estimator", "n"],
                "indexes": [
                    models.Index(
                        fields=["estimator", "n"], name="summary_estimator_n_idx"
                    )
                ],
            },
        ),
    ]
