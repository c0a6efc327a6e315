from functools import lru_cache

from pi_conf import ConfigSettings
from pydantic import Field


class CoindexSettings(ConfigSettings):
    node_budget: int = Field(default=2_000_000, ge=1)
    horizon_margin: int = Field(default=64, ge=0)
    probe_trials: int = Field(default=1000, ge=1)
    probe_seed: int = 0
    replay_trials: int = Field(default=25, ge=1)

    model_config = {
        "appname": "pi-coindex",
        "env_prefix": "COINDEX_",
    }


@lru_cache(maxsize=1)
def get_settings() -> CoindexSettings:
    return CoindexSettings()
