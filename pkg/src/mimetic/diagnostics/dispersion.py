"""Discrete frequencies of the semi-discrete 1D wave system.

Compatible pair:  M0 u̇ = D̃ h,  M1 ḣ = -D̃ᵀ u  ->  D̃ M1⁻¹ D̃ᵀ v = ω² M0 v
Colocated CG1:    M u̇ = -D h,  M ḣ = -D u    ->  D M⁻¹ Dᵀ v = ω² M v
"""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from src.mimetic.config import settings
from src.mimetic.diagnostics.infsup import pair_spec
from src.mimetic.errors import InvalidArgumentError
from src.mimetic.fem.assembly import assemble_grad_1d, assemble_mass
from src.mimetic.fem.space import make_space
from src.mimetic.linalg import whitened_singular_values
from src.mimetic.mesh import build_interval_mesh
from src.mimetic.models import DispersionResult

logger = logging.getLogger(__name__)


def dispersion_spectrum_1d(
    pair: str,
    n_elements: int,
    c: float = 1.0,
    *,
    length: float = 1.0,
    zero_rtol: Optional[float] = None,
) -> DispersionResult:
    spec = pair_spec(pair)
    if spec.dim != 1:
        raise InvalidArgumentError(f"dispersion analysis is 1D only, got pair '{pair}'")
    zero_rtol = settings.diagnostics.zero_frequency_rtol if zero_rtol is None else zero_rtol

    mesh = build_interval_mesh(length, n_elements)
    V0 = make_space(mesh, *spec.velocity)
    V1 = make_space(mesh, *spec.pressure)
    if spec.colocated:
        D = assemble_grad_1d(V0, V1, colocated=True)
    else:
        D = assemble_grad_1d(V0, V1)
    omega = c * whitened_singular_values(D, assemble_mass(V0), assemble_mass(V1), rank_rtol=0.0)

    top = float(omega.max()) if omega.size else 0.0
    zero_count = int(np.count_nonzero(omega <= zero_rtol * top))
    logger.info("%s Ne=%d: %d zero frequencies of %d", pair, n_elements, zero_count, omega.size)
    return DispersionResult(
        label=pair.lower(),
        frequencies=[float(w) for w in omega],
        zero_count=zero_count,
    )


def lowest_nonzero_frequency(result: DispersionResult) -> float:
    freqs = np.asarray(result.frequencies)
    return float(freqs[result.zero_count]) if result.zero_count < freqs.size else 0.0
