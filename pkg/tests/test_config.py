import math
from pathlib import Path

import numpy as np
import pytest
from numpy.testing import assert_allclose

from semihelix import presets
from semihelix.config import parse_config, parse_grid
from semihelix.errors import ParseError, ValidationError

MINIMAL = """
n = 3
base = circle(1)
r = 1
epsilon = 0.5236
"""


def test_minimal_defaults():
    cfg = parse_config(MINIMAL)
    assert_allclose(cfg.direction, [0, 0, 1])
    assert cfg.theta0 == 0.0
    assert cfg.window.epsilon == pytest.approx(0.5236)
    assert cfg.spec().r == 1.0
    assert cfg.sample_grid(cfg.surface()).counts == (64, 33)


def test_comments_and_pi_expressions():
    cfg = parse_config("# fixture\nn = 3  # ambient\nbase = circle(1)\nr = 1/4\nepsilon = pi/6\ntheta0=-pi/12\n")
    assert cfg.r == 0.25
    assert cfg.epsilon == pytest.approx(math.pi / 6)
    assert cfg.theta0 == pytest.approx(-math.pi / 12)


def test_epsilon_above_bound():
    with pytest.raises(ValidationError, match="pi/2"):
        parse_config(MINIMAL.replace("0.5236", "1.6"))


def test_epsilon_zero_is_helix():
    cfg = parse_config(MINIMAL.replace("0.5236", "0"))
    w = cfg.window
    assert w.epsilon == 0.0
    assert bool(w.contains(0.0)) and not bool(w.contains(1e-6))


@pytest.mark.parametrize("text,line,key", [
    ("n = 3\nbase = circle(1)\nfoo = 2\n", 3, "foo"),
    ("n = 3\nn = 4\n", 2, "n"),
    ("n = 3\njust words\n", 2, None),
    ("n = 3\nr = \n", 2, "r"),
    ("n = 3\nr = one\n", 2, "r"),
    ("n = 3\nr = __import__('os')\n", 2, "r"),
    ("n = 3.5\n", 1, "n"),
])
def test_parse_errors_carry_location(text, line, key):
    with pytest.raises(ParseError) as info:
        parse_config(text)
    assert info.value.line == line
    assert info.value.key == key
    assert f"line {line}" in str(info.value)


@pytest.mark.parametrize("text", [
    "base = circle(1)\nr = 1\nepsilon = 0.1\n",
    "n = 3\nr = 1\nepsilon = 0.1\n",
    MINIMAL.replace("r = 1", "r = -1"),
    MINIMAL.replace("r = 1\n", ""),
    MINIMAL + "d = 1, 0\n",
    MINIMAL + "d = 1, 0, 0\n",  # not orthogonal to the base normal
    MINIMAL + "d = 0, 0, 0\n",
    MINIMAL + "theta0 = 1.2\n",
    MINIMAL + "grid = 1, 5\n",
    MINIMAL + "eta = sideways\n",
    MINIMAL.replace("circle(1)", "torus(2, 0.5)"),
    MINIMAL.replace("circle(1)", "blob"),
    "n = 3\nbase = cylinder(1)\ntarget = base\nstep = -1\n",
])
def test_validation_errors(text):
    with pytest.raises(ValidationError):
        parse_config(text)


def test_base_target_and_four_dimensions():
    cfg = parse_config("n = 3\nbase = plane\ntarget = base\n")
    assert cfg.spec() is None and cfg.surface().k == 2
    cfg = parse_config("n = 4\nbase = sphere(1)\nr = 0.5\nepsilon = 0.3\n")
    assert cfg.surface().k == 3
    assert cfg.sample_grid(cfg.surface()).counts == (24, 24, 17)


def test_inward_and_fd_options():
    cfg = parse_config(MINIMAL + "eta = inward\njacobian = fd\n")
    s = cfg.surface()
    assert s.jacobian_mode == "fd"
    assert_allclose(cfg.spec().eta([0.0]), [-1, 0, 0])


def test_overrides_revalidate():
    cfg = parse_config(MINIMAL)
    assert cfg.with_overrides(grid=(8, 5), seed=3, out=None).grid == (8, 5)
    with pytest.raises(ValidationError):
        cfg.with_overrides(grid=(1, 5))


def test_grid_single_count_broadcasts():
    cfg = parse_config(MINIMAL + "grid = 7\n")
    assert cfg.sample_grid(cfg.surface()).counts == (7, 7)
    with pytest.raises(ValidationError):
        parse_config(MINIMAL + "grid = 7, 7, 7\n").sample_grid(presets.circle(1.0))
    with pytest.raises(ValidationError):
        parse_grid("a,b")


@pytest.mark.parametrize("path", sorted((Path(__file__).parent.parent / "configs").glob("*.cfg")), ids=lambda p: p.stem)
def test_shipped_configs_parse(path):
    cfg = parse_config(path.read_text())
    assert cfg.surface().m == cfg.n
