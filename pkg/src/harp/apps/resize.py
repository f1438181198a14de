"""Resize-to-height task: a haptic anchor marks the target, the hand stops, the
figure is rescaled to the stopped height.

The anchor is a single focal point at ground + target height. A controller
stands in for the participant: it receives the anchor height and answers
where the hand actually stopped (an ideal controller stops exactly there; a
biased one models systematic over/undershoot). Offsets are reported per
figure with average and standard deviation, one row per controller.
"""

from __future__ import annotations

import math
from typing import Callable, Optional, Sequence

from ..device import DeviceDescriptor
from ..geometry import PRIMITIVE_KINDS, fit_to_volume, make_primitive, resize_to_height
from ..model import ModelError, Node, Transform
from ..render import HapticPoint
from ..model import Vec3

VIRTUAL_GROUND_Z = 0.17  # m above the array surface
HAND_SPEED = 0.05        # m/s nominal vertical speed for elapsed-time reporting

Controller = Callable[[float], float]  # anchor z in -> stopped hand z out


class ResizeError(ModelError):
    pass


def ideal_controller(anchor_z: float) -> float:
    return anchor_z


def biased_controller(bias_m: float) -> Controller:
    def controller(anchor_z: float) -> float:
        return anchor_z + bias_m
    return controller


def anchor_intensity(hand_z: float, anchor_z: float, graded: bool = False,
                     ramp: float = 0.03) -> float:
    """Anchor feedback strength; optionally ramps up as the hand closes in."""
    if not graded:
        return 1.0
    return max(0.0, 1.0 - abs(hand_z - anchor_z) / ramp)


def resize_task_run(figure: str, target_height: float,
                    controller: Controller = ideal_controller,
                    ground_z: float = VIRTUAL_GROUND_Z,
                    device: Optional[DeviceDescriptor] = None,
                    graded: bool = False) -> dict:
    """One resize trial; offset is |achieved - target| in centimeters."""
    if figure not in PRIMITIVE_KINDS:
        raise ResizeError("unknown-figure", figure)
    device = device if device is not None else DeviceDescriptor()
    anchor_z = ground_z + target_height
    if not (device.working_volume.min.z <= anchor_z <= device.working_volume.max.z):
        raise ResizeError("target-outside-volume",
                          f"anchor at {anchor_z} m exceeds the working volume")

    anchor = HapticPoint(Vec3(0.0, 0.0, anchor_z),
                         anchor_intensity(anchor_z, anchor_z, graded))
    stopped_z = controller(anchor_z)
    achieved_height = stopped_z - ground_z
    if achieved_height <= 0:
        raise ResizeError("invalid-stop", f"hand stopped at {stopped_z} m, below ground")

    mesh = make_primitive(figure)
    start = fit_to_volume(mesh, Transform.identity(), device.working_volume)
    node = Node(id=f"resize-{figure}", mesh=mesh, transform=start)
    final = resize_to_height(node, achieved_height, ground_z)

    offset_cm = abs(achieved_height - target_height) * 100.0
    elapsed = abs(stopped_z - ground_z) / HAND_SPEED
    return {
        "figure": figure,
        "target_height_m": target_height,
        "achieved_height_m": achieved_height,
        "offset_cm": offset_cm,
        "elapsed_s": elapsed,
        "anchor": anchor.to_json(),
        "final_scale": final.scale.to_json(),
    }


DEFAULT_TASK_FIGURES = ("octahedron", "cylinder", "pyramid", "cube", "sphere")


def resize_report(controllers: dict[str, Controller],
                  figures: Sequence[str] = DEFAULT_TASK_FIGURES,
                  targets: Optional[Sequence[float]] = None,
                  ground_z: float = VIRTUAL_GROUND_Z) -> dict:
    """Offset table: one row per controller, columns F1..Fn plus avg and std."""
    if targets is None:
        targets = [0.04 + 0.02 * (i % 4) for i in range(len(figures))]
    if len(targets) != len(figures):
        raise ResizeError("invalid-parameter", "need one target per figure")
    columns = [f"F{i + 1}" for i in range(len(figures))] + ["avg", "std"]
    rows = []
    for label, controller in controllers.items():
        offsets = [resize_task_run(f, t, controller, ground_z)["offset_cm"]
                   for f, t in zip(figures, targets)]
        avg = sum(offsets) / len(offsets)
        if len(offsets) > 1:
            std = math.sqrt(sum((o - avg) ** 2 for o in offsets) / (len(offsets) - 1))
        else:
            std = 0.0
        row = {"label": label}
        row.update({f"F{i + 1}": offsets[i] for i in range(len(offsets))})
        row["avg"] = avg
        row["std"] = std
        rows.append(row)
    return {
        "columns": columns,
        "figures": list(figures),
        "targets_m": list(targets),
        "ground_z_m": ground_z,
        "rows": rows,
    }
