"""HTTP adapter exposing an entity-linking model behind the /link protocol."""

from .config import AdapterConfig, load_adapter_config
from .service import ModelHolder, create_app

__all__ = ["AdapterConfig", "load_adapter_config", "ModelHolder", "create_app"]

__version__ = "0.1.0"
