"""Complete rigid-motion invariant (BRI) of protein backbones."""
from .errors import BRIError
from .geometry import (
    RigidMotion,
    apply_motion,
    canonical_pose,
    mirror,
    random_backbone,
    random_motion,
    residue_frame,
)
from .invariant import (
    BondStats,
    compute_bond_stats,
    compute_brain,
    compute_bri,
    compute_trin,
    corpus_invariant_stats,
    hat_bri,
    linf,
    mirror_bri,
    subchain_bri,
)
from .reconstruct import reconstruct

__version__ = "0.1.0"

__all__ = [
    "BRIError",
    "BondStats",
    "RigidMotion",
    "apply_motion",
    "canonical_pose",
    "compute_bond_stats",
    "compute_brain",
    "compute_bri",
    "compute_trin",
    "corpus_invariant_stats",
    "hat_bri",
    "linf",
    "mirror",
    "mirror_bri",
    "random_backbone",
    "random_motion",
    "reconstruct",
    "residue_frame",
    "subchain_bri",
]
