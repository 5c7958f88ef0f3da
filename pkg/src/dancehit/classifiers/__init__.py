from .base import Model, model_from_dict
from .bayes import GaussianNB, nb_fit, nb_score
from .c45 import DecisionTree, TreeNode, c45_fit
from .logistic import LogisticModel, logistic_fit, logistic_score, sigmoid
from .ripper import Condition, Rule, RuleSet, ripper_fit
from .svm import KernelSpec, SvmModel, grid_search_svm, kernel_eval, smo_fit, svm_score

__all__ = [
    "Model", "model_from_dict",
    "GaussianNB", "nb_fit", "nb_score",
    "DecisionTree", "TreeNode", "c45_fit",
    "LogisticModel", "logistic_fit", "logistic_score", "sigmoid",
    "Condition", "Rule", "RuleSet", "ripper_fit",
    "KernelSpec", "SvmModel", "grid_search_svm", "kernel_eval", "smo_fit", "svm_score",
]
