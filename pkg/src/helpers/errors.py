class ConfigError(ValueError):
    """A configuration value violates its documented range or relation."""


class NonFiniteLossError(RuntimeError):
    def __init__(self, epoch: int, batch: int, value: float):
        super().__init__(f"Non-finite loss {value} at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch
        self.value = value
