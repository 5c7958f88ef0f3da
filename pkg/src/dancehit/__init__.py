"""Dance hit prediction from temporal audio features."""

from .datamodel import (
    SCHEMES, ChartListing, Dataset, GapScheme, Label, PeakRecord, SongAnalysis,
    assemble_dataset, compute_peaks, label_with_gap, out_of_time_split, parse_chart_csv,
    stratified_folds,
)
from .features import FEATURE_NAMES, descriptive_stats, feature_vector, yearly_trend

__version__ = "0.1.0"

__all__ = [
    "SCHEMES", "ChartListing", "Dataset", "GapScheme", "Label", "PeakRecord", "SongAnalysis",
    "assemble_dataset", "compute_peaks", "label_with_gap", "out_of_time_split", "parse_chart_csv",
    "stratified_folds", "FEATURE_NAMES", "descriptive_stats", "feature_vector", "yearly_trend",
]
