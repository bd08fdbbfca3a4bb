import math
from abc import ABC, abstractmethod
from typing import Any, Optional, Union

from confidencemeasure.logging.exceptions import DomainException, InvalidInputException


class Validator(ABC):
    def __set_name__(self, owner: Any, name: str) -> None:
        self.public_name = name
        self.private_name = f"_{name}"

    def __get__(self, instance: Any, objtype: Any = None) -> Any:
        if instance is None:
            return self
        return getattr(instance, self.private_name)

    def __set__(self, instance: Any, value: Any) -> None:
        self.validate(value)
        setattr(instance, self.private_name, value)

    @abstractmethod
    def validate(self, value: Any) -> None:
        pass


class Number(Validator):
    """
    Finite real number, optionally bounded. Bounds are inclusive unless
    `exclusive_min` / `exclusive_max` is set.
    """

    def __init__(
        self,
        min_value: Optional[Union[int, float]] = None,
        max_value: Optional[Union[int, float]] = None,
        exclusive_min: bool = False,
        exclusive_max: bool = False,
    ) -> None:
        self.min_value: Optional[Union[int, float]] = min_value
        self.max_value: Optional[Union[int, float]] = max_value
        self.exclusive_min = exclusive_min
        self.exclusive_max = exclusive_max

    def _domain(self) -> str:
        left = "(" if self.exclusive_min or self.min_value is None else "["
        right = ")" if self.exclusive_max or self.max_value is None else "]"
        lo = "-inf" if self.min_value is None else f"{self.min_value}"
        hi = "inf" if self.max_value is None else f"{self.max_value}"
        return f"{left}{lo}, {hi}{right}"

    def validate(self, value: Union[int, float]) -> None:
        name = getattr(self, "public_name", "value")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InvalidInputException(name, f"must be an int or float, got {type(value).__name__}")

        if not math.isfinite(value):
            raise DomainException(name, value, self._domain())

        if self.min_value is not None and (
            value < self.min_value or (self.exclusive_min and value == self.min_value)
        ):
            raise DomainException(name, value, self._domain())

        if self.max_value is not None and (
            value > self.max_value or (self.exclusive_max and value == self.max_value)
        ):
            raise DomainException(name, value, self._domain())


class Integer(Number):
    def validate(self, value: Union[int, float]) -> None:
        name = getattr(self, "public_name", "value")
        if isinstance(value, bool) or not isinstance(value, int):
            raise InvalidInputException(name, f"must be an int, got {type(value).__name__}")
        super().validate(value)
