"""Language-model interface: types, toy models, wire protocol, spec documents."""

from .remote import RemoteModel, parse_endpoint
from .server import ModelServer, serve
from .specs import BACKEND_ENV_VAR, build_model, load_model_file
from .toy import NgramModel, TableModel
from .types import (
    DISTRIBUTION_TOLERANCE,
    LanguageModel,
    SequenceScore,
    StepOutput,
    TokenSequence,
    Vocabulary,
    candidate_representation,
    score_sequence,
    step,
)

__all__ = [
    "BACKEND_ENV_VAR",
    "DISTRIBUTION_TOLERANCE",
    "LanguageModel",
    "ModelServer",
    "NgramModel",
    "RemoteModel",
    "SequenceScore",
    "StepOutput",
    "TableModel",
    "TokenSequence",
    "Vocabulary",
    "build_model",
    "candidate_representation",
    "load_model_file",
    "parse_endpoint",
    "score_sequence",
    "serve",
    "step",
]
