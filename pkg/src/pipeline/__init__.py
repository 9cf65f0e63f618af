"""Pipeline module: forward simulation, reconstruction and the command line."""

from src.pipeline.reconstruction_pipeline import MODES, Reconstruction, ReconstructionPipeline
from src.pipeline.utils import add_relative_noise, born_vhat, interpolate_pairs

__all__ = [
    "MODES",
    "Reconstruction",
    "ReconstructionPipeline",
    "add_relative_noise",
    "born_vhat",
    "interpolate_pairs",
]
