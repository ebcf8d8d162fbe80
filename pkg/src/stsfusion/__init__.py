"""Monte-Carlo simulator for space-time-spreading aided decision fusion."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    DispersionSet,
    SystemConfig,
    baseline_encode,
    build_effective_map,
    encode_block,
    generate_dispersion_set,
    linearize_received,
    normalize_dispersion,
)
from .sensors import SensorProfile  # noqa: E402
from .fusion import FusionInput, RULE_NAMES  # noqa: E402
from .simulate import Scenario, run_trials  # noqa: E402
