"""Geometry-based next-frame prediction toolkit.

A recurrent convolutional depth network over monocular video plus a
geometric engine that warps the current frame into the next one using the
predicted depth and the camera's ego-motion.
"""

__version__ = "0.1.0"
