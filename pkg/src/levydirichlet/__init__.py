"""Nonlocal Dirichlet problems for isotropic unimodal Levy operators.

Library layout:

* ``levy_models``       -- model families (stable, truncated stable,
                           subordinate Brownian motion) and their analytic
                           fingerprints (characteristic exponent,
                           concentration functions, scaling checks).
* ``potential_kernels`` -- fundamental solutions: transient potential,
                           compensated kernels, lambda-potentials, the
                           kernel-case selector and growth checks.
* ``dirichlet_core``    -- domains, exact exit sampling, walk-on-spheres
                           estimators and the representation solver.
* ``regularity``        -- moduli of continuity, Dini integrals, branch
                           selection and the Kato-class estimator.
* ``counterexamples``   -- critical right-hand sides and second-difference
                           probe curves certifying loss of C^2 regularity.
* ``cli``               -- batch front door (JSON configs, CSV/figure output).
"""

__version__ = "0.1.0"

from . import quadrature  # noqa: F401
