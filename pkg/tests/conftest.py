import numpy as np
import pytest

from gridlang.boolexpr import SymbolMap
from gridlang.env import Direction, EnvConfig, make_layout
from gridlang.objects import Color, ObjectSpec, Shape


@pytest.fixture
def config():
    return EnvConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def identity_map():
    # symbols 0..5 are the colors in enum order, 6..8 the shapes
    return SymbolMap.identity()


GREY_BALL = ObjectSpec(Color.GREY, Shape.BALL)
RED_KEY = ObjectSpec(Color.RED, Shape.KEY)
YELLOW_BOX = ObjectSpec(Color.YELLOW, Shape.BOX)
BLUE_BALL = ObjectSpec(Color.BLUE, Shape.BALL)


@pytest.fixture
def facing_grey_ball():
    # agent at (2,2) facing east, grey ball at (3,2)
    return make_layout(
        8, 8, (2, 2), Direction.EAST,
        [((3, 2), GREY_BALL), ((6, 6), RED_KEY)],
    )
