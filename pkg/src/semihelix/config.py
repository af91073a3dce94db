"""
Run configuration: a flat ``key = value`` text file.

Blank lines and ``#`` comments are ignored. Numeric values may be plain
floats or small arithmetic expressions in ``pi`` (``epsilon = pi/6``).
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field, replace

import numpy as np

from semihelix import presets
from semihelix.construct import SemiHelixSpec, build_product_surface
from semihelix.errors import ParseError, ValidationError
from semihelix.euclid import AngleWindow, axis, direction
from semihelix.surface import ParamImmersion, SampleGrid

KEYS = {
    "n", "base", "r", "theta0", "epsilon", "d", "eta", "target", "grid", "out",
    "seed", "start", "span", "step", "jacobian", "neighborhood", "cloud",
}

DEFAULT_GRID = {1: (64,), 2: (64, 33), 3: (24, 24, 17)}

_OPS = {
    ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
    ast.Div: operator.truediv, ast.Pow: operator.pow, ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}


def _eval_number(text: str) -> float:
    def ev(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ValueError(text)

    value = ev(ast.parse(text.strip(), mode="eval").body)
    if not math.isfinite(value):
        raise ValueError(text)
    return value


def parse_numbers(text: str) -> tuple:
    return tuple(_eval_number(p) for p in text.split(","))


@dataclass(frozen=True)
class RunConfig:
    n: int
    base: str
    r: float | None = None
    theta0: float = 0.0
    epsilon: float | None = None
    d: tuple | None = None
    eta: str = "outward"
    target: str = "semihelix"
    grid: tuple | None = None
    out: str = "out"
    seed: int = 0
    start: tuple | None = None
    span: float | None = None
    step: float | None = None
    jacobian: str = "analytic"
    neighborhood: int = 5
    cloud: str | None = None
    lines: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self.validate()

    # -- validation --------------------------------------------------------------
    def validate(self):
        if self.n < 2:
            raise ValidationError("n must be at least 2")
        if self.target not in ("semihelix", "base"):
            raise ValidationError("target must be 'semihelix' or 'base'")
        if self.eta not in ("outward", "inward"):
            raise ValidationError("eta must be 'outward' or 'inward'")
        if self.jacobian not in ("analytic", "fd"):
            raise ValidationError("jacobian must be 'analytic' or 'fd'")
        if self.target == "semihelix":
            if self.n < 3:
                raise ValidationError("a swept surface needs n >= 3")
            if self.r is None or self.epsilon is None:
                raise ValidationError("target 'semihelix' needs both r and epsilon")
            if not self.r > 0:
                raise ValidationError(f"r={self.r!r} must be positive")
            AngleWindow(self.theta0, self.epsilon)  # 0 <= epsilon < pi/2, window inside (-pi/2, pi/2)
        if self.d is not None and len(self.d) != self.n:
            raise ValidationError(f"d must have {self.n} components")
        if self.step is not None and not self.step > 0:
            raise ValidationError("step must be positive")
        if self.neighborhood < 2:
            raise ValidationError("neighborhood must be at least 2")
        if self.grid is not None and any(g < 2 for g in self.grid):
            raise ValidationError("grid counts must be at least 2")
        self.surface()  # preset dimension and direction compatibility

    # -- derived objects ---------------------------------------------------------
    @property
    def direction(self) -> np.ndarray:
        if self.d is None:
            return axis(self.n)
        try:
            return direction(self.d)
        except ValueError as exc:
            raise ValidationError(f"d: {exc}") from exc

    @property
    def window(self) -> AngleWindow:
        return AngleWindow(self.theta0, self.epsilon or 0.0)

    def base_surface(self) -> ParamImmersion:
        m = self.n - 1 if self.target == "semihelix" else self.n
        s = presets.preset(self.base, m)
        if self.eta == "inward":
            s = presets.flipped(s)
        return s

    def spec(self) -> SemiHelixSpec | None:
        if self.target != "semihelix":
            return None
        return SemiHelixSpec(self.base_surface(), self.r, self.window, self.direction)

    def surface(self) -> ParamImmersion:
        spec = self.spec()
        s = build_product_surface(spec) if spec is not None else self.base_surface()
        return s.with_fd() if self.jacobian == "fd" else s

    def sample_grid(self, s: ParamImmersion) -> SampleGrid:
        counts = self.grid if self.grid is not None else DEFAULT_GRID.get(s.k, (16,) * s.k)
        if len(counts) == 1:
            counts = counts * s.k
        if len(counts) != s.k:
            raise ValidationError(f"grid needs {s.k} counts for this surface, got {len(counts)}")
        return SampleGrid.over(s, counts)

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def _convert(key: str, value: str):
    if key in ("n", "seed", "neighborhood"):
        v = _eval_number(value)
        if v != int(v):
            raise ValueError(value)
        return int(v)
    if key in ("r", "theta0", "epsilon", "span", "step"):
        return _eval_number(value)
    if key in ("d", "start"):
        return parse_numbers(value)
    if key == "grid":
        return parse_grid(value)
    return value.strip()


def parse_grid(text: str) -> tuple:
    try:
        counts = tuple(int(c) for c in text.split(","))
    except ValueError as exc:
        raise ValidationError(f"grid must be comma-separated integers, got {text!r}") from exc
    return counts


def parse_config(text: str) -> RunConfig:
    """
    Parse and validate a config document.

    Raises:
        ParseError: malformed lines, unknown or repeated keys, unreadable
            values (with line number and key).
        ValidationError: values that violate a constraint.
    """
    values, lines = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ParseError("unknown key", line=lineno, key=key)
        if key in values:
            raise ParseError("key given twice", line=lineno, key=key)
        if not value:
            raise ParseError("empty value", line=lineno, key=key)
        try:
            values[key] = _convert(key, value)
        except (ValueError, SyntaxError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ParseError(f"cannot read value {value!r}", line=lineno, key=key) from None
        lines[key] = lineno
    for required in ("n", "base"):
        if required not in values:
            raise ValidationError(f"missing required key {required!r}")
    return RunConfig(**values, lines=lines)
