"""Named polynomial fixtures and user fixture files."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .poly import Polynomial, format_poly, parse


@dataclass(frozen=True)
class Fixture:
    name: str
    text: str
    nvars: int
    point: tuple  # distinguished (singular) point, ints or Fractions
    homogeneous: bool
    note: str = ""

    @property
    def poly(self) -> Polynomial:
        return parse(self.text, self.nvars)

    def to_json(self) -> dict:
        point = [int(v) if Fraction(v).denominator == 1 else str(v) for v in self.point]
        return {"name": self.name, "poly": format_poly(self.poly), "nvars": self.nvars,
                "point": point, "homogeneous": self.homogeneous, "note": self.note}


FIXTURES: dict[str, Fixture] = {f.name: f for f in [
    Fixture("line", "x1", 1, (0,), True, "smooth hypersurface in 1D"),
    Fixture("cross", "x1*x2", 2, (0, 0), True, "normal crossings"),
    Fixture("circle", "x1^2 + x2^2", 2, (0, 0), True, "isolated real point"),
    Fixture("cubic", "x1*(x2^2 + x3^2) + x2^3", 3, (0, 0, 0), True, "singular along a line"),
    Fixture("cusp", "x2^2 - x1^3", 2, (0, 0), False, "cusp"),
    Fixture("shifted_cusp", "x2^2 - (x1 + 1)^3", 2, (-1, 0), False, "cusp moved off the origin"),
    Fixture("smooth", "x2 - x1^2", 2, (0, 0), False, "smooth parabola"),
    Fixture("double_line", "x1^2", 2, (0, 0), True, "non-reduced line"),
]}

HOMOGENEOUS = [n for n, f in FIXTURES.items() if f.homogeneous and f.nvars > 1 and n != "double_line"]


class FixtureError(KeyError):
    pass


def get(name: str) -> Fixture:
    try:
        return FIXTURES[name]
    except KeyError:
        raise FixtureError(f"unknown fixture {name!r}; known: {', '.join(sorted(FIXTURES))}") from None


def load_file(path: str | Path) -> list[Fixture]:
    """Read fixtures from a file.

    JSON files hold a list of {"name", "poly", "nvars"?, "point"?}; any other
    file is read one fixture per line as ``name: polynomial`` ('#' comments).
    """
    path = Path(path)
    text = path.read_text()
    entries: list[dict] = []
    if path.suffix == ".json":
        entries = json.loads(text)
    else:
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            name, _, poly = line.partition(":")
            if not poly:
                raise FixtureError(f"expected 'name: polynomial', got {line!r}")
            entries.append({"name": name.strip(), "poly": poly.strip()})
    out = []
    for e in entries:
        P = parse(e["poly"], e.get("nvars"))
        point = tuple(Fraction(v) for v in e.get("point", [0] * P.nvars))
        out.append(Fixture(e["name"], e["poly"], P.nvars, point, P.is_homogeneous(), e.get("note", "")))
    return out
