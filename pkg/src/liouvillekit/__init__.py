"""Liouville interpolation systems over model Anosov and partially hyperbolic 3-flows."""
from .forms import AnnihilatorForm, Area2, Jet2, lie_s, lie_X, wedge
from .models import cat_suspension, da_chart, geodesic_frame_local, model_by_name
from .lis import (alpha_coeffs, change_of_basis, contact_densities, fibration_min_check,
                  horizontal_map, liouville_density, make_system, scaling_map, validate)
from .dynamics import (integrate_Y, liouville_field, normal_expansion, skeleton_solve,
                       strong_normal_direction, sync_check)
from .systems import bundled_system, bundled_systems, system_from_descriptor

__version__ = "0.1.0"

__all__ = ["AnnihilatorForm", "Area2", "Jet2", "lie_s", "lie_X", "wedge", "cat_suspension",
           "da_chart", "geodesic_frame_local", "model_by_name", "alpha_coeffs",
           "change_of_basis", "contact_densities", "fibration_min_check", "horizontal_map",
           "liouville_density", "make_system", "scaling_map", "validate", "integrate_Y",
           "liouville_field", "normal_expansion", "skeleton_solve", "strong_normal_direction",
           "sync_check", "bundled_system", "bundled_systems", "system_from_descriptor"]
