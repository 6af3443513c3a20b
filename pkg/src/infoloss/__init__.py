"""Information loss and operation loss of finite representations for classification."""
from .bounds import (
    ExtremalResult,
    Theorem2Report,
    extremal_pmf,
    f1,
    f_min_mi,
    f_min_mi_bruteforce,
    i_loss_bruteforce,
    i_loss_lower_bound,
    max_entropy_inequality_check,
    theorem2_check,
)
from .estimators import (
    EstimatorConfig,
    LossCurvePoint,
    empirical_mi_true,
    info_loss,
    loss_curve,
    op_loss,
    plugin_mi,
    projected_info_loss,
    weak_info_loss,
)
from .finite_info import (
    DiscreteJoint,
    DomainError,
    Pmf,
    ValidationError,
    bayes_error,
    binary_entropy,
    conditional_entropy,
    conditional_mi,
    entropy,
    fano_upper,
    mutual_information,
    prior_error,
)
from .models import (
    GaussClassModel,
    LabeledDataset,
    RotatedScaleInvariant,
    RotationInvariant,
    ScaleInvariant,
    TranslationInvariant,
    TwoClass1D,
    bayes_risk_mc,
    build,
    invariant_projection,
    mi_mc,
    mpe_rule,
    optimal_partition,
    posterior,
    sample,
)
from .partitions import (
    Partition,
    asymmetric_dyadic,
    gessaman,
    product_partition,
    projected_uniform,
    quantize,
    refine_with_rule,
    shrink_diagnostic,
    tsp,
)

__version__ = "0.1.0"
