"""voxscreen: vocal-biomarker screening toolkit.

Audio ingestion, MFCC / Mel-spectrogram / convolutional-encoder features,
from-scratch classifiers (logistic regression, RBF-SVM via SMO, a small
CNN, a bidirectional LSTM) and stratified cross-validated evaluation.
"""

__version__ = "0.1.0"
