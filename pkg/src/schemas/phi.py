"""Schemas for Young function specs"""
from pydantic import BaseModel, Field

from src.services.exceptions import InvalidYoungFunction
from src.services.young import DEFAULT_SPLICE, Family, YoungFunction
from src.templates.message import BAD_PHI_SPEC, UNKNOWN_PHI_FAMILY

_ARITY = {
    Family.POWER: (1, 1),
    Family.POWER_OVER_P: (1, 1),
    Family.EXP_INVERSE_SQUARE: (0, 1),
    Family.POWER_LOG: (2, 2),
}


class PhiSpec(BaseModel):
    """Tagged Young function record ``{family, params}``.

    The text form is ``family[:p1,p2,...]``, e.g. ``power:2``, ``pop:3``,
    ``expinvsq``, ``expinvsq:0.7`` or ``powerlog:2,1``.
    """
    family: Family
    params: list[float] = Field(default_factory=list)

    @classmethod
    def parse(cls, text: str) -> "PhiSpec":
        """Parse the text form.

        Raises:
            InvalidYoungFunction: On an unknown family, a wrong parameter count or a bad number.
        """
        name, _, raw = text.strip().partition(":")
        try:
            family = Family(name.lower())
        except ValueError:
            raise InvalidYoungFunction(UNKNOWN_PHI_FAMILY.format(family=name)) from None
        if family is Family.CUSTOM:
            raise InvalidYoungFunction(BAD_PHI_SPEC.format(text=text, reason="custom functions have no text form"))
        try:
            params = [float(p) for p in raw.split(",")] if raw else []
        except ValueError:
            raise InvalidYoungFunction(BAD_PHI_SPEC.format(text=text, reason="parameters must be numbers")) from None
        low, high = _ARITY[family]
        if not low <= len(params) <= high:
            raise InvalidYoungFunction(BAD_PHI_SPEC.format(text=text, reason=f"expected {low} to {high} parameters"))
        return cls(family=family, params=params)

    def build(self) -> YoungFunction:
        """Instantiate the Young function, validating the parameters."""
        match self.family:
            case Family.POWER:
                return YoungFunction.power(*self.params)
            case Family.POWER_OVER_P:
                return YoungFunction.power_over_p(*self.params)
            case Family.EXP_INVERSE_SQUARE:
                return YoungFunction.exp_inverse_square(*(self.params or [DEFAULT_SPLICE]))
            case Family.POWER_LOG:
                return YoungFunction.power_log(*self.params)
        raise InvalidYoungFunction(BAD_PHI_SPEC.format(text=self.family.value, reason="custom functions have no text form"))


def parse_phi(text: str) -> YoungFunction:
    """Young function from its text form."""
    return PhiSpec.parse(text).build()
