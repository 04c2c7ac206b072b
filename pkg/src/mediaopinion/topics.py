"""The closed, ordered set of topic domains."""

from enum import Enum


class Topic(str, Enum):
    IDEOLOGY = "ideology"
    GOVERNMENT_ADMINISTRATION = "government_administration"
    DEMOCRACY = "democracy"
    ECONOMIC_DEVELOPMENT = "economic_development"
    MARKETIZATION = "marketization"
    WELFARE_WELLBEING = "welfare_wellbeing"
    GLOBALIZATION = "globalization"
    CULTURE = "culture"

    @property
    def order(self) -> int:
        return TOPICS.index(self)

    @classmethod
    def parse(cls, value) -> "Topic":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown topic {value!r}") from None

    def __str__(self) -> str:
        return self.value


TOPICS = tuple(Topic)

SIGNS = ("positive", "negative")
CATEGORIES = ("negative", "neutral", "positive")
