"""Crossbar stack geometry.

All lengths are in nanometres; thermal conductivities in W/(m*K). The stack,
bottom to top: substrate, insulator, bottom electrodes (running along
columns), switching oxide with one filament per cell, top electrodes
(running along rows).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

from .errors import GeometryInconsistent, ValidationError

MATERIALS = ("substrate", "insulator", "electrode", "oxide", "filament")

DEFAULT_CONDUCTIVITIES = {
    "substrate": 150.0,  # Si
    "insulator": 1.4,    # SiO2
    "electrode": 72.0,   # Pt
    "oxide": 4.0,        # oxygen-deficient HfOx switching layer
    "filament": 5.0,     # conductive filament core
}

SPACING_MIN_NM = 1.0
SPACING_MAX_NM = 1000.0


@dataclass(frozen=True)
class CrossbarGeometry:
    """Physical description of an m x n passive crossbar.

    `electrode_spacing` is the gap between the electrodes of two adjacent
    cells, so the cell pitch is `electrode_width + electrode_spacing`.
    The default electrode width is chosen so that, at the default 5 nm
    voxel size, every cell centre lands exactly on a voxel centre, which
    keeps the extracted coupling kernel mirror-symmetric.
    """

    rows: int = 5
    cols: int = 5
    electrode_spacing: float = 50.0
    electrode_width: float = 55.0
    electrode_thickness: float = 5.0
    top_electrode_thickness: float | None = None  # None: same as bottom
    oxide_thickness: float = 10.0
    substrate_thickness: float = 60.0
    insulator_thickness: float = 10.0
    filament_radius: float = 10.0
    filament_gap: float = 5.0  # residual oxide barrier above the filament
    material_conductivities: dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_CONDUCTIVITIES)
    )

    def __post_init__(self):
        problems = self.validation_problems()
        if problems:
            raise ValidationError(problems)

    def validation_problems(self) -> list[str]:
        p: list[str] = []
        if self.rows < 1:
            p.append("geometry.rows: must be >= 1")
        if self.cols < 1:
            p.append("geometry.cols: must be >= 1")
        for name in (
            "electrode_spacing",
            "electrode_width",
            "electrode_thickness",
            "oxide_thickness",
            "substrate_thickness",
            "insulator_thickness",
            "filament_radius",
        ):
            if getattr(self, name) <= 0:
                p.append(f"geometry.{name}: must be > 0")
        if self.top_electrode_thickness is not None and self.top_electrode_thickness <= 0:
            p.append("geometry.top_electrode_thickness: must be > 0")
        if not 0 <= self.filament_gap < self.oxide_thickness:
            p.append("geometry.filament_gap: must be in [0, oxide_thickness)")
        if not SPACING_MIN_NM <= self.electrode_spacing <= SPACING_MAX_NM:
            p.append(
                f"geometry.electrode_spacing: must be within "
                f"[{SPACING_MIN_NM:g}, {SPACING_MAX_NM:g}] nm"
            )
        if self.filament_radius >= self.electrode_width / 2:
            p.append(
                "geometry.filament_radius: filament must be narrower than the electrode"
            )
        missing = [m for m in MATERIALS if m not in self.material_conductivities]
        if missing:
            p.append(
                "geometry.material_conductivities: missing " + ", ".join(missing)
            )
        for name, kappa in self.material_conductivities.items():
            if kappa <= 0:
                p.append(f"geometry.material_conductivities.{name}: must be > 0")
        return p

    @property
    def pitch(self) -> float:
        """Cell-to-cell pitch in nm."""
        return self.electrode_width + self.electrode_spacing

    def check_filament_fits(self) -> None:
        if self.filament_radius >= self.electrode_width / 2:
            raise GeometryInconsistent(
                f"filament radius {self.filament_radius} nm does not fit under a "
                f"{self.electrode_width} nm electrode"
            )

    def with_spacing(self, spacing_nm: float) -> "CrossbarGeometry":
        d = asdict(self)
        d["electrode_spacing"] = float(spacing_nm)
        return CrossbarGeometry(**d)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "CrossbarGeometry":
        known = set(cls.__dataclass_fields__)  # type: ignore[attr-defined]
        unknown = set(data) - known
        if unknown:
            raise ValidationError(
                [f"geometry.{k}: unknown field" for k in sorted(unknown)]
            )
        return cls(**data)

    @classmethod
    def from_json(cls, path: str) -> "CrossbarGeometry":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))
