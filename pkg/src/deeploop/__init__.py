"""Loop-closure detection with a convolutional autoencoder trained to map
randomly warped images onto the HOG descriptor of their counterpart."""
from .kernels import BACKEND
from .image import GrayImage, load_pgm, save_pgm
from .hog import HogParams, hog_descriptor
from .db import DescriptorDB
from .loop import DetectorConfig, LoopDetector, calibrate_tau

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DescriptorDB",
    "DetectorConfig",
    "GrayImage",
    "HogParams",
    "LoopDetector",
    "calibrate_tau",
    "hog_descriptor",
    "load_pgm",
    "save_pgm",
]
