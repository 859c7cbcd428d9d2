# Acquisition Package
from .closed_form import Incumbent, PoolStats, WhitenedIncumbent, ei_gn, ei_s_bar, select_incumbent, whiten
from .functions import AcquisitionFunction, EIGradientNorm, ExpectedImprovement, LogExpectedImprovement
from .gaussian import ei, log_ei, normal_pdf_cdf
from .monte_carlo import event_bound_check, lower_bound_check, mc_ei_f, mc_ei_g, mc_ei_s, mc_ei_s_orthant
from .thompson import thompson_select

__all__ = [
    "Incumbent", "PoolStats", "WhitenedIncumbent", "ei_gn", "ei_s_bar", "select_incumbent", "whiten",
    "AcquisitionFunction", "EIGradientNorm", "ExpectedImprovement", "LogExpectedImprovement",
    "ei", "log_ei", "normal_pdf_cdf",
    "event_bound_check", "lower_bound_check", "mc_ei_f", "mc_ei_g", "mc_ei_s", "mc_ei_s_orthant",
    "thompson_select",
]
