"""Mixed continuous/binary input spaces and unit-interval rescaling.

All internal computation happens on the unit scale: continuous coordinates
are affinely mapped to [0, 1], binary coordinates stay {0, 1}. Points are
stored as flat vectors with continuous coordinates first, binary last.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class SpaceError(ValueError):
    """Raised for violated design-space contracts (ranges, dimensions)."""


@dataclass(frozen=True)
class VariableSpec:
    """One input variable: a continuous range in native units, or a binary flag."""

    name: str
    kind: str  # "continuous" or "binary"
    lower: float = 0.0
    upper: float = 1.0

    def __post_init__(self):
        if self.kind not in ("continuous", "binary"):
            raise SpaceError(f"variable {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == "binary":
            object.__setattr__(self, "lower", 0.0)
            object.__setattr__(self, "upper", 1.0)
        elif not self.lower < self.upper:
            raise SpaceError(
                f"variable {self.name!r}: lower {self.lower} must be < upper {self.upper}"
            )


@dataclass(frozen=True)
class DesignSpace:
    """Ordered collection of variables, continuous listed before binary."""

    variables: tuple[VariableSpec, ...]

    def __post_init__(self):
        if not self.variables:
            raise SpaceError("design space needs at least one variable")
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise SpaceError("variable names must be unique")
        kinds = [v.kind for v in self.variables]
        first_binary = kinds.index("binary") if "binary" in kinds else len(kinds)
        if "continuous" in kinds[first_binary:]:
            raise SpaceError("continuous variables must precede binary variables")

    @property
    def n_continuous(self) -> int:
        return sum(v.kind == "continuous" for v in self.variables)

    @property
    def n_binary(self) -> int:
        return sum(v.kind == "binary" for v in self.variables)

    @property
    def dim(self) -> int:
        return len(self.variables)

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    def index_of(self, name: str) -> int:
        for i, v in enumerate(self.variables):
            if v.name == name:
                return i
        raise SpaceError(f"no variable named {name!r}")

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array([v.lower for v in self.variables])
        hi = np.array([v.upper for v in self.variables])
        return lo, hi

    def to_unit(self, native: np.ndarray) -> np.ndarray:
        """Rescale native-unit rows to the unit scale.

        Continuous coordinates map affinely onto [0, 1]; binary coordinates
        must already be 0 or 1 and pass through. Raises SpaceError naming the
        variable for any out-of-range value.
        """
        native = np.atleast_2d(np.asarray(native, dtype=float))
        if native.shape[1] != self.dim:
            raise SpaceError(f"expected {self.dim} coordinates, got {native.shape[1]}")
        out = np.empty_like(native)
        for j, v in enumerate(self.variables):
            col = native[:, j]
            if v.kind == "continuous":
                bad = (col < v.lower) | (col > v.upper)
                if bad.any():
                    raise SpaceError(
                        f"variable {v.name!r}: value {col[bad][0]} outside "
                        f"[{v.lower}, {v.upper}]"
                    )
                out[:, j] = (col - v.lower) / (v.upper - v.lower)
            else:
                if not np.isin(col, (0.0, 1.0)).all():
                    raise SpaceError(f"variable {v.name!r}: binary values must be 0 or 1")
                out[:, j] = col
        return out

    def to_native(self, unit: np.ndarray) -> np.ndarray:
        """Inverse of to_unit: map unit-scale rows back to native units."""
        unit = np.atleast_2d(np.asarray(unit, dtype=float))
        if unit.shape[1] != self.dim:
            raise SpaceError(f"expected {self.dim} coordinates, got {unit.shape[1]}")
        out = np.empty_like(unit)
        for j, v in enumerate(self.variables):
            if v.kind == "continuous":
                out[:, j] = v.lower + unit[:, j] * (v.upper - v.lower)
            else:
                out[:, j] = unit[:, j]
        return out

    def validate_unit(self, unit: np.ndarray) -> None:
        unit = np.atleast_2d(unit)
        nc = self.n_continuous
        if unit.shape[1] != self.dim:
            raise SpaceError(f"expected {self.dim} coordinates, got {unit.shape[1]}")
        if (unit[:, :nc] < 0).any() or (unit[:, :nc] > 1).any():
            raise SpaceError("continuous unit coordinates must lie in [0, 1]")
        if not np.isin(unit[:, nc:], (0.0, 1.0)).all():
            raise SpaceError("binary coordinates must be 0 or 1")


@dataclass(frozen=True)
class InputPoint:
    """A single configuration on the unit scale."""

    continuous: np.ndarray
    binary: np.ndarray

    @classmethod
    def from_array(cls, space: DesignSpace, unit_row: np.ndarray) -> "InputPoint":
        unit_row = np.asarray(unit_row, dtype=float).ravel()
        nc = space.n_continuous
        return cls(continuous=unit_row[:nc].copy(), binary=unit_row[nc:].copy())

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.continuous, self.binary])


def to_unit(space: DesignSpace, native: np.ndarray) -> InputPoint:
    """Map one native-unit point into an InputPoint on the unit scale."""
    row = space.to_unit(np.asarray(native, dtype=float).reshape(1, -1))[0]
    return InputPoint.from_array(space, row)


@dataclass
class CandidateSet:
    """Indexed, immutable pool of unit-scale candidate points.

    Indices are stable for the life of a run; classification state lives in
    the matcher, keyed by these indices.
    """

    space: DesignSpace
    unit: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.unit = np.ascontiguousarray(np.atleast_2d(self.unit), dtype=float)
        self.space.validate_unit(self.unit)
        uniq = np.unique(self.unit, axis=0)
        if uniq.shape[0] != self.unit.shape[0]:
            raise SpaceError("candidate set contains duplicate points")
        self.unit.setflags(write=False)

    def __len__(self) -> int:
        return self.unit.shape[0]

    def point(self, index: int) -> InputPoint:
        return InputPoint.from_array(self.space, self.unit[index])
