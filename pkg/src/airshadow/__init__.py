"""airshadow: infer indoor activities from air-quality telemetry.

Pipeline: collect (or simulate) 1 Hz multi-device pollutant streams, align
them onto a common grid, extract windowed statistical features around
annotated events, and classify with lightweight from-scratch models.
"""

__version__ = "0.1.0"

from .core import (  # noqa: F401
    LABELS,
    POLLUTANTS,
    ActivityAnnotation,
    ActivityLabel,
    PollutantKind,
    PollutantSample,
    parse_activity_label,
    validate_sample,
)
