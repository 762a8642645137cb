"""Decision support toolkit for building energy retrofit planning.

Subpackages cover the full pipeline: dataset schemas and ingestion
(:mod:`retrokit.schema`), feature encoding (:mod:`retrokit.features`), the
multi-label classifier (:mod:`retrokit.mlp`), hyperparameter search
(:mod:`retrokit.tuning`), additive attributions (:mod:`retrokit.shapley`),
tabular synthesis (:mod:`retrokit.datagen`), synthetic-data scoring
(:mod:`retrokit.quality`), evaluation metrics (:mod:`retrokit.metrics`),
retrofit measure vocabularies (:mod:`retrokit.measures`), trained-model
artifacts (:mod:`retrokit.artifact`), the HTTP service
(:mod:`retrokit.service`), and the command-line pipeline
(:mod:`retrokit.cli`).
"""

__version__ = "0.1.0"
