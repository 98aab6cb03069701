"""Monodromy and Maslov indices of integrable systems.

Exact normal forms for integer monodromy matrices with eigenvalue 1, and a
numerical check on the champagne-bottle system that the Maslov vector is
fixed by the monodromy.
"""

from .dynamics import RegularValue, SystemSpec, TorusPoint
from .monodromy import LoopSpec, MonodromyReport, continue_loop
from .normal_forms import (
    ClassificationResult,
    EigenSignature,
    Form,
    Verdict,
    block_diagonalize,
    change_basis,
    classify,
    conjugate_to_e1,
    double_cover,
    eigen_signature,
    reduce_mg2,
    unimodular_completion,
    verify_theorem1,
)

__version__ = "0.1.0"
