"""Neural cellular robot substrate."""

from ._core import (
    CmaEs,
    ConfigError,
    DataError,
    campaign,
    develop,
    evaluate,
    feature_configurations,
    genome_length,
    morphology,
    read_genome,
    sensor_activity,
    write_genome,
)

__all__ = [
    "CmaEs",
    "ConfigError",
    "DataError",
    "campaign",
    "develop",
    "evaluate",
    "feature_configurations",
    "genome_length",
    "morphology",
    "read_genome",
    "sensor_activity",
    "write_genome",
]
