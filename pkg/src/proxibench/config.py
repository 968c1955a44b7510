"""Run configuration: every tunable the pipeline exposes, with defaults.

Loaded from a JSON file and overridable per-flag by the CLI. Validation is
eager and names the offending field.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from typing import Optional

from .geometry import ForwardAxis

CATEGORY_NAMES = ("intention", "exploration", "exploitation", "chain_of_actions")

_FORWARD_AXES = {axis.value: axis for axis in ForwardAxis}


@dataclass
class RunConfig:
    seed: int = 0

    # Occupancy and navigation.
    resolution: float = 0.1  # meters per grid cell
    margin_cells: int = 1
    turn_penalty: float = 0.1  # cost per direction change, in cell units

    # Clip sampling.
    forecasting_lead: float = 4.0  # seconds of context before an anchor event
    min_clip_len: float = 2.0
    max_clip_len: float = 60.0

    # Perception.
    dispersion_deg: float = 2.0
    min_fixation_s: float = 0.3
    speed_threshold: float = 0.05  # m/s; interactions require strictly more
    velocity_window_s: float = 0.5
    half_angle_deg: float = 75.0
    max_range_m: float = 8.0
    forward_axis: str = "+z"

    # Question forging.
    distance_bin_edges: tuple = (0.0, 0.5, 1.0, 2.0, 4.0)  # top bin open-ended
    angle_none_deg: float = 10.0  # below this magnitude: no turn
    angle_slight_deg: float = 30.0
    angle_moderate_deg: float = 90.0
    exploration_approx_payload: str = "first_step"  # or "path_length"

    # Evaluation.
    prompt_frames: int = 8

    # Pipeline.
    categories: tuple = CATEGORY_NAMES
    generator_endpoint: Optional[str] = None  # alternate-chain proposer service
    input_path: Optional[str] = None
    output_dir: Optional[str] = None

    def __post_init__(self):
        self.distance_bin_edges = tuple(float(e) for e in self.distance_bin_edges)
        self.categories = tuple(self.categories)
        self.validate()

    def validate(self) -> None:
        def fail(name, why):
            raise ValueError("config field {}: {}".format(name, why))

        if self.resolution <= 0:
            fail("resolution", "must be positive")
        if self.margin_cells < 0:
            fail("margin_cells", "must be >= 0")
        if self.turn_penalty < 0:
            fail("turn_penalty", "must be >= 0")
        if self.forecasting_lead <= 0:
            fail("forecasting_lead", "must be positive")
        if not 0 < self.min_clip_len <= self.max_clip_len:
            fail("min_clip_len", "need 0 < min_clip_len <= max_clip_len")
        if self.dispersion_deg <= 0:
            fail("dispersion_deg", "must be positive")
        if self.min_fixation_s <= 0:
            fail("min_fixation_s", "must be positive")
        if self.speed_threshold < 0:
            fail("speed_threshold", "must be >= 0")
        if self.velocity_window_s <= 0:
            fail("velocity_window_s", "must be positive")
        if not 0 < self.half_angle_deg < 180:
            fail("half_angle_deg", "must be in (0, 180)")
        if self.max_range_m <= 0:
            fail("max_range_m", "must be positive")
        if self.forward_axis not in _FORWARD_AXES:
            fail("forward_axis", "must be one of {}".format(sorted(_FORWARD_AXES)))
        edges = self.distance_bin_edges
        if len(edges) < 2 or edges[0] != 0.0 or list(edges) != sorted(set(edges)):
            fail("distance_bin_edges", "must start at 0 and strictly increase")
        if not 0 < self.angle_none_deg < self.angle_slight_deg < self.angle_moderate_deg < 180:
            fail("angle_none_deg", "need 0 < none < slight < moderate < 180")
        if self.exploration_approx_payload not in ("first_step", "path_length"):
            fail("exploration_approx_payload", "must be first_step or path_length")
        if self.prompt_frames < 1:
            fail("prompt_frames", "must be >= 1")
        unknown = set(self.categories) - set(CATEGORY_NAMES)
        if unknown:
            fail("categories", "unknown categories {}".format(sorted(unknown)))

    @property
    def forward(self) -> ForwardAxis:
        return _FORWARD_AXES[self.forward_axis]

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["distance_bin_edges"] = list(self.distance_bin_edges)
        out["categories"] = list(self.categories)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError("unknown config fields: {}".format(sorted(unknown)))
        return cls(**data)

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
