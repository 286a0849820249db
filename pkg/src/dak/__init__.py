"""Probabilistic diffusion auctions on social networks."""
from .graph import SELLER, GraphError, Report, ReportProfile, SocialNetwork, TrueProfile
from .maps import BreadthFirst, ExactModeInfeasible, GeneralizedBreadthFirst, WeightedGBF
from .fpdm import SurchargeVariant, fpdm_expected, fpdm_sample
from .mupdm import mupdm_expected, spmupdm_expected

__all__ = [
    "SELLER", "GraphError", "Report", "ReportProfile", "SocialNetwork", "TrueProfile",
    "BreadthFirst", "GeneralizedBreadthFirst", "WeightedGBF", "ExactModeInfeasible",
    "SurchargeVariant", "fpdm_expected", "fpdm_sample", "mupdm_expected", "spmupdm_expected",
]
