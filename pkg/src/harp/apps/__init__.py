"""Reference applications: shape inspector, Simon game, resize task."""

from .buttons import ButtonFsm, button_step
from .engine import SimonEngine, read_hud
from .inspector import inspector_run
from .resize import (biased_controller, ideal_controller, resize_report,
                     resize_task_run)
from .rounds import ScriptedPlayer, simon_round_run
from .simon import SimonState, simon_check, simon_new, simon_new_sequence
