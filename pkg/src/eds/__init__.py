"""Exact symbolic workbench for coframings, structure equations and their invariants.

Subpackages:

* ``eds.ring``      -- exact multivariate rational-function arithmetic
* ``eds.forms``     -- graded exterior algebra over a named 1-form basis
* ``eds.models``    -- structure models (coframing + d-rules) and verifiers
* ``eds.catalog``   -- builtin models and derived-coframing definitions
* ``eds.analysis``  -- coefficient-matrix invariants, classifier, torsion pipeline
* ``eds.numerics``  -- Lambert-W branches, PDE residuals, finite-difference checks
* ``eds.dsl``       -- the ``.eds`` model-file dialect (parser and printer)
* ``eds.cli``       -- the ``eds`` command-line driver
"""

__version__ = "0.1.0"
