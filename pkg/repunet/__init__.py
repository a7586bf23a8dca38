#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

from .datagen import (
    NoiseKind,
    NoisyDataset,
    NormBounds,
    PolynomialTarget,
    ProductTarget,
    ReferenceNetworkTarget,
    TargetFunction,
    TargetKind,
    TargetSpec,
    make_noisy_dataset,
    make_target,
)
from .errors import (
    ConfigError,
    ConstraintError,
    DegenerateNeuronError,
    DimensionMismatchError,
    DivergenceError,
    DomainError,
    ModelFormatError,
    QuadratureSizeError,
    RepunetError,
    UnsupportedOrderError,
)
from .files import FORMAT_VERSION, deserialize_network, read_dataset, read_network, serialize_network
from .network import MultiIndex, NetworkGradient, Polynomial, RepuNetwork, Scaling, sigma
from .penalties import (
    PenaltyKind,
    barron_p_norm,
    check_constraints,
    outer_weight_costs,
    penalty_subgradient,
    penalty_value,
    project_constraints,
)
from .quadrature import (
    QuadratureRule,
    QuadratureSpec,
    RuleKind,
    build_rule,
    l2_norm,
    sobolev_norm,
    sobolev_profile,
)
from .solver import (
    FitReport,
    OptimizerConfig,
    TikhonovConfig,
    default_barron_constant,
    differentiate,
    fit,
    objective,
    objective_gradient,
    refit_outer,
    select_lambda,
)

__version__ = "0.1.0"

__all__ = [
    "FORMAT_VERSION",
    "ConfigError",
    "ConstraintError",
    "DegenerateNeuronError",
    "DimensionMismatchError",
    "DivergenceError",
    "DomainError",
    "FitReport",
    "ModelFormatError",
    "MultiIndex",
    "NetworkGradient",
    "NoiseKind",
    "NoisyDataset",
    "NormBounds",
    "OptimizerConfig",
    "PenaltyKind",
    "Polynomial",
    "PolynomialTarget",
    "ProductTarget",
    "QuadratureRule",
    "QuadratureSizeError",
    "QuadratureSpec",
    "ReferenceNetworkTarget",
    "RepuNetwork",
    "RepunetError",
    "RuleKind",
    "Scaling",
    "TargetFunction",
    "TargetKind",
    "TargetSpec",
    "TikhonovConfig",
    "UnsupportedOrderError",
    "__version__",
    "barron_p_norm",
    "build_rule",
    "check_constraints",
    "default_barron_constant",
    "deserialize_network",
    "differentiate",
    "fit",
    "l2_norm",
    "make_noisy_dataset",
    "make_target",
    "objective",
    "objective_gradient",
    "outer_weight_costs",
    "penalty_subgradient",
    "penalty_value",
    "project_constraints",
    "read_dataset",
    "read_network",
    "refit_outer",
    "select_lambda",
    "serialize_network",
    "sigma",
    "sobolev_norm",
    "sobolev_profile",
]
