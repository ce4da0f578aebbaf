"""Network dissection, n-way classification and representation analysis."""

from ._core import (
    ActivationTensor,
    ComputationError,
    ConceptNotDetected,
    CorruptionError,
    Error,
    FormatError,
    InputError,
    IoError,
    NeuronLabel,
    ValidationError,
    decode_activation_tensor,
    encode_activation_tensor,
    linear_cka,
    read_activation_tensor,
    read_labels,
    run_cli,
    ttest,
    write_activation_tensor,
)

__all__ = [
    "ActivationTensor",
    "ComputationError",
    "ConceptNotDetected",
    "CorruptionError",
    "Error",
    "FormatError",
    "InputError",
    "IoError",
    "NeuronLabel",
    "ValidationError",
    "decode_activation_tensor",
    "encode_activation_tensor",
    "linear_cka",
    "read_activation_tensor",
    "read_labels",
    "run_cli",
    "ttest",
    "write_activation_tensor",
]
