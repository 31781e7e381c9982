"""handstates: atomic hand-object interaction state classification.

Mask-based statistical-kinematic feature extraction from frame sequences,
a synthetic episode generator, and a from-scratch classifier ladder whose
strongest member is a bidirectional gated recurrent cell run at sequence
length 1, i.e. as a static feature encoder.
"""

__version__ = "0.1.0"
