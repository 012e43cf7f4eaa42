import pytest

from src.schemas.phi import PhiSpec, parse_phi
from src.services.exceptions import InvalidYoungFunction
from src.services.young import DEFAULT_SPLICE, Family


@pytest.mark.parametrize("text, family, params", [
    ("power:2", Family.POWER, [2.0]),
    ("pop:3", Family.POWER_OVER_P, [3.0]),
    ("expinvsq", Family.EXP_INVERSE_SQUARE, []),
    ("expinvsq:0.7", Family.EXP_INVERSE_SQUARE, [0.7]),
    ("powerlog:2,1", Family.POWER_LOG, [2.0, 1.0]),
    (" POWER:1.5 ", Family.POWER, [1.5]),
])
def test_parse(text, family, params):
    spec = PhiSpec.parse(text)
    assert spec.family is family
    assert spec.params == params


@pytest.mark.parametrize("text", ["power:2", "pop:3", "expinvsq", "powerlog:2,1"])
def test_spec_text_is_stable(text):
    assert parse_phi(text).spec == text


def test_default_splice():
    assert parse_phi("expinvsq").params == (DEFAULT_SPLICE,)


@pytest.mark.parametrize("text", ["cubic:3", "power", "power:a", "powerlog:2", "custom:x", "power:0.5", "expinvsq:2"])
def test_rejected(text):
    with pytest.raises(InvalidYoungFunction):
        parse_phi(text)
