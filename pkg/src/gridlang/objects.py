"""Object identities and attributes for the pickup domain.

There are 18 object identities (6 colors x 3 shapes) and 9 attributes
(the colors and shapes themselves). Every identity satisfies exactly one
color attribute and one shape attribute.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass


class Color(enum.IntEnum):
    RED = 0
    PURPLE = 1
    GREY = 2
    GREEN = 3
    YELLOW = 4
    BLUE = 5


class Shape(enum.IntEnum):
    KEY = 0
    BALL = 1
    BOX = 2


@dataclass(frozen=True, order=True)
class ObjectSpec:
    """One of the 18 (color, shape) object identities."""

    color: Color
    shape: Shape

    @property
    def index(self) -> int:
        # color-major ordering, stable across the codebase
        return int(self.color) * len(Shape) + int(self.shape)

    @classmethod
    def from_index(cls, i: int) -> "ObjectSpec":
        if not 0 <= i < N_OBJECTS:
            raise ValueError(f"object index out of range: {i}")
        return cls(Color(i // len(Shape)), Shape(i % len(Shape)))

    def __str__(self) -> str:
        return f"{self.color.name.lower()} {self.shape.name.lower()}"


N_OBJECTS = len(Color) * len(Shape)

ALL_OBJECTS: tuple[ObjectSpec, ...] = tuple(
    ObjectSpec(c, s) for c in Color for s in Shape
)


@dataclass(frozen=True, order=True)
class Attribute:
    """One of the 9 basis attributes: a color or a shape."""

    color: Color | None = None
    shape: Shape | None = None

    def __post_init__(self):
        if (self.color is None) == (self.shape is None):
            raise ValueError("attribute must be exactly one of color/shape")

    def satisfied_by(self, obj: ObjectSpec) -> bool:
        if self.color is not None:
            return obj.color == self.color
        return obj.shape == self.shape

    @property
    def name(self) -> str:
        if self.color is not None:
            return self.color.name.lower()
        return self.shape.name.lower()

    def __str__(self) -> str:
        return self.name


ALL_ATTRIBUTES: tuple[Attribute, ...] = tuple(
    [Attribute(color=c) for c in Color] + [Attribute(shape=s) for s in Shape]
)

N_ATTRIBUTES = len(ALL_ATTRIBUTES)

ATTRIBUTE_BY_NAME = {a.name: a for a in ALL_ATTRIBUTES}

COLOR_WORDS = tuple(c.name.lower() for c in Color)
SHAPE_WORDS = tuple(s.name.lower() for s in Shape)
