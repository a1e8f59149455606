"""Radar human-activity-recognition preprocessing toolkit.

Micro-Doppler spectrogram denoising (adaptive resolution, adaptive
thresholding, entropy-based), full-reference image metrics, Capon
range-angle maps, a no-reference RA-map cleanliness scorer and a
temporal lump tracker with soft/hard mask generation.
"""

__version__ = "0.1.0"
