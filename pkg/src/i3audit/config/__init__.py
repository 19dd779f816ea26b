"""
This module loads and processes the configuration for the i3audit package.

It reads a YAML configuration file named 'config.yaml' located in the same directory and exposes its
contents as a plain dictionary. The default class scheme, scoring policy, output rendering, oracle and
synthetic scenario parameters are all taken from here, so they can be changed globally at runtime.

Attributes:
    config (dict): The loaded configuration dictionary.
"""
import os
import yaml

from decimal import ROUND_HALF_EVEN, ROUND_HALF_UP

CONFIG_YAML_PATH = os.path.join(os.path.dirname(__file__), "config.yaml")

ROUNDING_MODES = (ROUND_HALF_EVEN, ROUND_HALF_UP)

with open(CONFIG_YAML_PATH, encoding="utf-8") as f:
    config = yaml.safe_load(f)


def set_scheme(boundaries, weights, name: str = None):
    """
    Set the default percentile rank class scheme.

    :param boundaries: Strictly increasing cumulative percentages ending at 100.
    :type boundaries: list
    :param weights: One weight per class.
    :type weights: list
    :param name: Optional display name of the scheme.
    :type name: str
    """
    if len(boundaries) != len(weights):
        raise ValueError(f"Got {len(boundaries)} boundaries but {len(weights)} weights.")
    config["scheme"]["boundaries"] = list(boundaries)
    config["scheme"]["weights"] = list(weights)
    config["scheme"]["name"] = name


def set_policy(rule: str = None, ties: str = None, rank_by: str = None):
    """
    Set the default scoring policy (counting rule, tie policy) and the ranking basis.

    :param rule: One of "strict-less", "inclusive", "plus-0.9" or "fractional".
    :type rule: str
    :param ties: One of "lowest", "highest", "average-rank" or "average-weight".
    :type ties: str
    :param rank_by: Either "r" or "i3".
    :type rank_by: str
    """
    if rule is not None:
        config["scoring"]["rule"] = rule
    if ties is not None:
        config["scoring"]["ties"] = ties
    if rank_by is not None:
        config["scoring"]["rank_by"] = rank_by


def set_output_digits(digits: int):
    """
    Set the number of decimals used when rendering non-integer rationals.

    :param digits: Number of decimals.
    :type digits: int
    """
    if digits < 0:
        raise ValueError("digits must be non-negative")
    config["output"]["digits"] = digits


def set_rounding(rounding: str):
    """
    Set the rounding mode used when rendering rationals.

    :param rounding: "ROUND_HALF_EVEN" or "ROUND_HALF_UP".
    :type rounding: str
    """
    if rounding not in ROUNDING_MODES:
        raise ValueError(f"Unsupported rounding mode '{rounding}', expected one of {ROUNDING_MODES}")
    config["output"]["rounding"] = rounding


def set_oracle_params(**params):
    """
    Update the oracle parameters (slices_per_paper, permutations, seed).

    :param params: Parameter names and values.
    :type params: dict
    """
    config["oracle"].update(params)


def set_synth_params(**params):
    """
    Update the defaults of the synthetic scenario generator.

    :param params: Parameter names and values.
    :type params: dict
    """
    config["synth"].update(params)
