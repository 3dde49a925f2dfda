"""molfuse: tri-modal molecular token fusion at desk scale.

A small, fully self-contained stack: float64 autodiff tensors, toy
1D/2D/3D molecular encoders, a relation-biased collaborative projector
that condenses all modalities into a fixed-length token sequence, a tiny
decoder language model for end-to-end training, and molecule-centric
evaluation metrics (CHARM/RCHARM, BLEU, numeric validity/MAE, LLM judge).
"""

__version__ = "0.1.0"
