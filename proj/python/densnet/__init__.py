"""Python access to the densnet equivariant density models."""

from ._densnet import (
    DensnetError,
    Model,
    clebsch_gordan,
    generate_clusters,
    hidden_config,
    irreps_dim,
    parse_config,
    parse_irreps,
    random_rotation,
    real_sph_harm,
    run_experiment,
    synthetic_basis_spec,
    truncate_spec,
    wigner_d,
)

__all__ = [
    "DensnetError",
    "Model",
    "clebsch_gordan",
    "generate_clusters",
    "hidden_config",
    "irreps_dim",
    "parse_config",
    "parse_irreps",
    "random_rotation",
    "real_sph_harm",
    "run_experiment",
    "synthetic_basis_spec",
    "truncate_spec",
    "wigner_d",
]
