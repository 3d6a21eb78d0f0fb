"""
reasonforge: synthetic multi-image reasoning datasets.

Builds multiple-choice reasoning instances over procedurally generated
3D scenes rendered as multiple 2D views, and supports training and
evaluating models on them:

- Spatial questions (object relations and occlusion across views)
- Sequential questions (ordering shuffled frames of a moving object)
- Analytical questions (chaining scale ratios across images)
- Five-step reasoning annotations for every instance
- Difficulty filtering and staged curriculum files from trial logs
- Rule-based or service-backed answer matching and per-category scoring
"""

__version__ = "0.1.0"
__license__ = "MIT"

from .errors import ErrorCode, ReasonForgeError, ConfigError, QAError, CurriculumError, EvalError
from .models import Instance, MCQ, ReasoningSteps
from .config import PipelineConfig, load_config

__all__ = [
    "ErrorCode", "ReasonForgeError", "ConfigError", "QAError", "CurriculumError", "EvalError",
    "Instance", "MCQ", "ReasoningSteps",
    "PipelineConfig", "load_config",
]
