"""Malware triage from Hilbert-curve byte images and a self-organising incremental network."""

from .binviz import ByteImage, ColorClass, classify_byte, class_to_rgb, render, render_file, write_png
from .features import FeatureVector, Stripe, extract, quantize_color, stripe_histogram
from .hilbert import index_to_point, order_for_length, point_to_index
from .soinn import Soinn, StepReport, TrainParams, Verdict, train_layer2

__version__ = "0.1.0"

__all__ = [
    "ByteImage", "ColorClass", "FeatureVector", "Soinn", "StepReport", "Stripe", "TrainParams",
    "Verdict", "class_to_rgb", "classify_byte", "extract", "index_to_point", "order_for_length",
    "point_to_index", "quantize_color", "render", "render_file", "stripe_histogram", "train_layer2",
    "write_png",
]
