"""Active learning of Mealy machines with observation trees and apartness."""
from .ads import AdsNode, build_ads, expected_reward
from .dot import parse_dot, render_dot
from .learner import Hypothesis, Learner, RunReport, build_hypothesis, check_consistency, run
from .mealy import Alphabet, MealyMachine, bisimilar, minimize, random_machine, transfer
from .obstree import ObservationTree, norm_bound
from .oracle import EqOracleConfig, SulSession, Teacher

__all__ = [
    "AdsNode", "Alphabet", "EqOracleConfig", "Hypothesis", "Learner", "MealyMachine",
    "ObservationTree", "RunReport", "SulSession", "Teacher", "bisimilar", "build_ads",
    "build_hypothesis", "check_consistency", "expected_reward", "minimize", "norm_bound",
    "parse_dot", "random_machine", "render_dot", "run", "transfer",
]

__version__ = "0.1.0"
