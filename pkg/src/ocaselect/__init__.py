"""Block-aware wrapper feature selection by coordinate ascent.

Feature subsets are searched with a two-phase coordinate ascent that
exploits block structure (groups of features observing one quantity), scored
by a built-in gradient-boosted-tree classifier. Bit-flip ascent and
recursive feature elimination baselines run under the identical scorer, and
a convergence lab checks the randomized coordinate-descent rate bounds on
strongly convex quadratics.
"""

from .ascent import (
    OcaConfig,
    SelectionResult,
    TraceEntry,
    flip_ascent,
    jbest_init,
    phase1_block_ascent,
    phase2_flip_ascent,
    run_oca,
)
from .baselines import RfeConfig, rfe_sweep, run_bca, run_rfe
from .convergence import (
    BoundCheckReport,
    DescentProblem,
    DescentTrace,
    LemmaCheckReport,
    check_linear_bound,
    check_sublinear_bound,
    gradient_check,
    lemma1_check,
    make_quadratic,
    rcd_run,
)
from .data import (
    Block,
    BlockSpec,
    DataError,
    Dataset,
    SplitDataset,
    generate_synthetic,
    load_csv,
    save_csv,
    split,
)
from .estimators import BcaSelector, GbmClassifier, OcaSelector, RfeSelector
from .gbm import (
    FittedModel,
    GbmConfig,
    ImportanceRanking,
    SubsetScorer,
    fit,
    gini_impurity,
    importances,
    score,
)
from .masks import FeatureMask, SelectionState, expand, flip, popcount_pct

__version__ = "0.1.0"

__all__ = [
    "Block",
    "BlockSpec",
    "BcaSelector",
    "BoundCheckReport",
    "DataError",
    "Dataset",
    "DescentProblem",
    "DescentTrace",
    "FeatureMask",
    "FittedModel",
    "GbmClassifier",
    "GbmConfig",
    "ImportanceRanking",
    "LemmaCheckReport",
    "OcaConfig",
    "OcaSelector",
    "RfeConfig",
    "RfeSelector",
    "SelectionResult",
    "SelectionState",
    "SplitDataset",
    "SubsetScorer",
    "TraceEntry",
    "check_linear_bound",
    "check_sublinear_bound",
    "expand",
    "fit",
    "flip",
    "flip_ascent",
    "generate_synthetic",
    "gini_impurity",
    "gradient_check",
    "importances",
    "jbest_init",
    "lemma1_check",
    "load_csv",
    "make_quadratic",
    "phase1_block_ascent",
    "phase2_flip_ascent",
    "popcount_pct",
    "rcd_run",
    "rfe_sweep",
    "run_bca",
    "run_oca",
    "run_rfe",
    "save_csv",
    "score",
    "split",
]
