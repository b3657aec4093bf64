"""Class labels and sensing geometries."""

from enum import Enum


class Label(str, Enum):
    HYDRATED = "hydrated"
    DEHYDRATED = "dehydrated"

    @property
    def code(self):
        """0 for hydrated, 1 for dehydrated (the positive class)."""
        return 0 if self is Label.HYDRATED else 1

    @classmethod
    def from_code(cls, code):
        return cls.DEHYDRATED if int(code) else cls.HYDRATED


class ScenarioKind(str, Enum):
    CHEST = "chest"  # reflection geometry
    HAND = "hand"  # transmission geometry


CLASS_ORDER = (Label.HYDRATED, Label.DEHYDRATED)
