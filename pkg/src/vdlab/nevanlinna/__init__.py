"""Circle quadrature engines for m, N, n, T, T0, A, L and M."""
from .functionals import (
    a_point_moduli,
    ahlfors_shimizu,
    ahlfors_shimizu_identity,
    area_characteristic,
    base_characteristic,
    characteristic,
    count,
    counting_curve,
    integrated_count,
    log_max_modulus,
    log_max_modulus_curve,
    log_ratio,
    max_modulus,
    max_modulus_curve,
    min_log_modulus_curve,
    proximity,
    proximity_curve,
    sph_density,
    target_parts,
)
from .grid import INF, GrowthCurve, RadiusGrid, dumps, is_infinity, normalize_target, target_label
from .quadrature import DEFAULT_QUAD, CircleQuadrature, circle_mean, circle_means
from .winding import winding_number

__all__ = [
    "a_point_moduli", "ahlfors_shimizu", "ahlfors_shimizu_identity", "area_characteristic",
    "base_characteristic", "characteristic", "count", "counting_curve", "integrated_count",
    "log_max_modulus", "log_max_modulus_curve", "log_ratio", "max_modulus",
    "max_modulus_curve", "min_log_modulus_curve", "proximity", "proximity_curve",
    "sph_density", "target_parts", "INF", "GrowthCurve", "RadiusGrid", "dumps",
    "is_infinity", "normalize_target", "target_label", "DEFAULT_QUAD", "CircleQuadrature",
    "circle_mean", "circle_means", "winding_number",
]
