"""Piezoelectric beam with heat conduction of memory type.

Thin bindings over the C++ core. Library failures raise PiezoError, whose
``code`` is the error name (``"MixingOutOfRange"``, ``"OnSpectrum"``, ...).
"""


class PiezoError(RuntimeError):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


from ._core import (  # noqa: E402
    DiscreteOperator,
    GridSpec,
    MemoryKernel,
    PhysicalParams,
    ResolventMethod,
    assemble,
    build_grid,
    check_dafermos,
    check_dissipation_bounds,
    classify,
    eigenvalues,
    energy,
    fit_exponential,
    fit_polynomial,
    initial_state,
    dissipation_constants,
    log_grid,
    make_params,
    poincare_one_end,
    resolvent_norm,
    resolvent_scan,
    simulate,
)


def operator(m=0.5, n_x=32, n_s=8, k=1.0, **coefficients):
    """Assemble the discrete generator for the prototype kernel in one call."""
    params = make_params(m=m, **coefficients)
    kernel = MemoryKernel.exponential(k)
    return assemble(params, kernel, build_grid(params, kernel, n_x, n_s))


__all__ = [
    "PiezoError",
    "DiscreteOperator",
    "GridSpec",
    "MemoryKernel",
    "PhysicalParams",
    "ResolventMethod",
    "assemble",
    "build_grid",
    "check_dafermos",
    "check_dissipation_bounds",
    "classify",
    "eigenvalues",
    "energy",
    "fit_exponential",
    "fit_polynomial",
    "initial_state",
    "dissipation_constants",
    "log_grid",
    "make_params",
    "operator",
    "poincare_one_end",
    "resolvent_norm",
    "resolvent_scan",
    "simulate",
]
