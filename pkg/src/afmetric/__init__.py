"""Finite truncations of AF-algebra filtrations with spectral seminorms.

Exact continued-fraction data feeds Effros-Shen and UHF towers of
finite-dimensional C*-algebras; each level carries a compatible trace,
conditional expectations onto the embedded sublevels, a truncated
Christensen-Ivan Dirac operator, and the Lip-seminorm it induces.  The
convergence module turns the finite-dimensionally checkable convergence
statements into scans, sampled estimates, and tail-bound certificates.
"""

__version__ = "0.1.0"

from .cfrac import (
    BaireSequence,
    ConvergentTable,
    DecimalLiteral,
    DigitStream,
    IrrationalHandle,
    QuadraticSurd,
    baire_distance,
    cf_agreement_depth,
    cf_expand,
    convergents,
    es_beta,
    parse_irrational,
    t_weight,
    tail_bound,
    uhf_gamma,
)
from .fdca import (
    AlgebraElement,
    BlockShape,
    TraceWeights,
    gns_inner,
    gns_norm,
    load_element,
    op_norm,
    random_element,
    save_element,
    sharp_constant,
    trace_state,
)
from .tower import Embedding, Tower, embed, embed_through, es_tower, uhf_tower, verify_tower
from .gns import SubalgebraBasis, cond_expectation, q_projection, subalgebra_basis
from .spectral import (
    DiracData,
    commutator_apply,
    dirac_apply,
    dirac_coeffs,
    dirac_data,
    lip_seminorm,
    lip_seminorm_detailed,
)
from .convergence import (
    Certificate,
    DistortionStats,
    ScanResult,
    ball_hausdorff_bound,
    ball_hausdorff_sampled,
    constants_convergence_scan,
    es_certificate,
    lip_convergence_scan,
    propinquity_tail_bound,
    seminorm_distortion,
    sup_transfer_check,
)
