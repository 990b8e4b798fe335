from dataclasses import dataclass


@dataclass(frozen=True)
class ServerConfig:
    """One model per process; the model must load before the port binds."""

    model: str                  # hub identifier or local checkpoint path
    device: str = "cpu"
    port: int = 8300
    host: str = "127.0.0.1"
    max_body_bytes: int = 65536
    max_batch_size: int = 16

    def __post_init__(self):
        if not (0 < self.port < 65536):
            raise ValueError(f"invalid port {self.port}")
        if self.max_body_bytes < 1024:
            raise ValueError("max_body_bytes unreasonably small")
