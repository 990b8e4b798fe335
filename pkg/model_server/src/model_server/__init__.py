from .app import create_app
from .config import ServerConfig
from .inference import SentimentModel

__all__ = ["create_app", "ServerConfig", "SentimentModel"]
