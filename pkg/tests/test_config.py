import copy
import pytest

from fractions import Fraction

from i3audit import config as config_module, ClassScheme
from i3audit.config import (config, set_scheme, set_policy, set_output_digits, set_rounding, set_oracle_params,
                            set_synth_params)
from i3audit.scoring import ScoringPolicy, CountingRule, TiePolicy
from i3audit.evolution import SynthConfig
from i3audit.oracle import OracleConfig
from i3audit.util import format_rational


@pytest.fixture
def restore_config():
    saved = copy.deepcopy(config)
    yield config
    config.clear()
    config.update(saved)


def test_default_config():
    assert config_module.config is config
    assert config["scheme"]["boundaries"] == [50, 75, 90, 95, 99, 100]
    assert config["scheme"]["weights"] == [1, 2, 3, 4, 5, 6]
    assert config["scoring"] == {"rule": "strict-less", "ties": "lowest", "rank_by": "r"}
    assert config["output"]["digits"] == 4
    assert config["oracle"]["slices_per_paper"] >= 100


def test_set_scheme(restore_config):
    set_scheme([50, 100], [1, 2], name="2PR")
    scheme = ClassScheme.default()
    assert scheme.boundaries == (50, 100)
    assert scheme.label == "2PR"
    with pytest.raises(ValueError):
        set_scheme([50, 100], [1])


def test_set_policy(restore_config):
    set_policy(rule="inclusive", ties="average-weight")
    policy = ScoringPolicy.default()
    assert policy.counting == CountingRule.INCLUSIVE_RANK
    assert policy.ties == TiePolicy.AVERAGE_WEIGHT
    set_policy(rule="fractional")
    assert ScoringPolicy.default().fractional


def test_set_output(restore_config):
    set_output_digits(2)
    assert format_rational(Fraction(61, 40)) == "1.52"
    set_rounding("ROUND_HALF_UP")
    assert format_rational(Fraction(61, 40)) == "1.53"
    with pytest.raises(ValueError):
        set_output_digits(-1)
    with pytest.raises(ValueError):
        set_rounding("ROUND_CEILING")


def test_set_oracle_and_synth_params(restore_config):
    set_oracle_params(permutations=7, seed=1)
    assert OracleConfig().permutations == 7
    assert OracleConfig().seed == 1
    set_synth_params(owners=2, steps=5)
    assert SynthConfig().owners == 2
    assert SynthConfig().steps == 5
