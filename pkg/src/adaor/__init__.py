"""adaor: a desk-scale lab for continuous-strength instruction editing.

Trains small conditional flow-matching models on synthetic paired edits,
samples them under several guidance variants across an edit-strength
parameter, and scores the resulting trajectories for smoothness.
"""

__version__ = "0.1.0"
