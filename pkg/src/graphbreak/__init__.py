"""Construction and numerical verification of perturbations that destroy
invariant Lagrangian graphs of conformally symplectic twist maps."""

from .approx import ApproxReport, fejer_mean, jackson_approximate, vallee_poussin
from .attractor import AttractorReport, MapSpec, default_beta, graph_test, graph_transform, iterate_cloud, standard_map
from .herman import (CriterionReport, derivative_extrema, destruction_verdict_1d, destruction_verdict_dd,
                     herman_residual_1d, herman_residual_dd, standard_map_threshold)
from .maps import (CandidateGraph, MapParams1D, MapParamsDD, generating_function_check, hypothesis_check,
                   lipschitz_bound, step_1d, step_dd)
from .perturb import (BumpSpec, PerturbationBundle, assemble_perturbation, build_derivative_polynomial,
                      build_model_bump, ck_norm_estimate, construct_bundle, delta_of_lambda)
from .trigpoly import GridFn, HolderNorm, TrigPoly, calculus, eval_and_derive, extrema_and_norms

__version__ = "0.1.0"
