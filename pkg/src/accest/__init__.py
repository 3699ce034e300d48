"""Label-free accuracy estimation from classifier prediction matrices."""

from .errors import DegenerateInput, InvalidInput, InvalidParameter, NumericalFailure
from .estimators import (
    CalibrationProfile,
    ConfidenceScore,
    EstimatorReport,
    atc_score,
    average_confidence,
    average_negative_entropy,
    calibrate_atc,
    dispersity_score,
    doc_score,
    full_report,
    mutual_information_score,
    nuclear_norm_score,
    rectified_nuclear_norm_score,
)
from .predmatrix import (
    LabeledPredictions,
    PredictionMatrix,
    RawScores,
    ScoreKind,
    accuracy,
    adopt_probabilities,
    predicted_labels,
    temper_softmax,
)

__version__ = "0.1.0"
