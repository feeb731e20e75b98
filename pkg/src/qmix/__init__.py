"""Nonabelian Fourier analysis and mixing certificates for finite groups."""

from .errors import (
    CertificationError,
    GroupFormatError,
    GroupMismatchError,
    PreconditionError,
    QmixError,
    SizeGuardError,
    SpecError,
)
from .groups import (
    GroupSpec,
    GroupTable,
    build_closure,
    build_group,
    construct_group,
    direct_product,
    inverse,
    is_abelian,
    mul,
    parse_spec,
    read_group,
    validate_group,
    validate_spec,
    write_group,
)
from .chartab import (
    CharacterTable,
    ConjugacyData,
    character_table_csv,
    character_table_report,
    class_mult_coefficients,
    compute_character_table,
    conjugacy_classes,
    quasirandom_degree,
    witten_zeta,
)
from .fourier import (
    GroupFunction,
    SpectralProfile,
    character_function,
    class_function_scalar,
    constant_function,
    convolve,
    delta_shift,
    function_from_json,
    function_to_json,
    indicator_function,
    invert_class_function,
    mean,
    mean_zero_decompose,
    mu_set,
    mu_translated_class,
    p_norm,
    spectral_profile,
)
from .mixing import (
    ChainCheck,
    ChainReport,
    LemmaReport,
    MixingReport,
    adversarial_search,
    count_progressions,
    cs_chain_diagnostics,
    gamma_functional,
    random_ensemble,
    theorem_bound,
    theta_defect,
    verify_bnp,
    verify_derivative_bound,
)

__version__ = "0.1.0"

__all__ = [
    "CertificationError",
    "GroupFormatError",
    "GroupMismatchError",
    "PreconditionError",
    "QmixError",
    "SizeGuardError",
    "SpecError",
    "GroupSpec",
    "GroupTable",
    "build_closure",
    "build_group",
    "construct_group",
    "direct_product",
    "inverse",
    "is_abelian",
    "mul",
    "parse_spec",
    "read_group",
    "validate_group",
    "validate_spec",
    "write_group",
    "CharacterTable",
    "ConjugacyData",
    "character_table_csv",
    "character_table_report",
    "class_mult_coefficients",
    "compute_character_table",
    "conjugacy_classes",
    "quasirandom_degree",
    "witten_zeta",
    "GroupFunction",
    "SpectralProfile",
    "character_function",
    "class_function_scalar",
    "constant_function",
    "convolve",
    "delta_shift",
    "function_from_json",
    "function_to_json",
    "indicator_function",
    "invert_class_function",
    "mean",
    "mean_zero_decompose",
    "mu_set",
    "mu_translated_class",
    "p_norm",
    "spectral_profile",
    "ChainCheck",
    "ChainReport",
    "LemmaReport",
    "MixingReport",
    "adversarial_search",
    "count_progressions",
    "cs_chain_diagnostics",
    "gamma_functional",
    "random_ensemble",
    "theorem_bound",
    "theta_defect",
    "verify_bnp",
    "verify_derivative_bound",
    "__version__",
]
