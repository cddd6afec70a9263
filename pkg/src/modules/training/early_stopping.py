from __future__ import annotations

import copy


class EarlyStopping:
    """
    Stops when the monitored loss has not improved for `patience` epochs and
    keeps a copy of the best weights.
    """

    def __init__(self, patience: int = 10, min_delta: float = 0.0):
        self.patience = patience
        self.min_delta = min_delta
        self.best = float("inf")
        self.best_epoch: int | None = None
        self.best_state: dict | None = None
        self.wait = 0
        self.stopped_epoch: int | None = None

    def __call__(self, epoch: int, loss: float, model) -> bool:
        """Record `loss` for `epoch`; returns True when training should stop."""
        if loss < self.best - self.min_delta:
            self.best = loss
            self.best_epoch = epoch
            self.best_state = copy.deepcopy(model.state_dict())
            self.wait = 0
            return False

        self.wait += 1
        if self.wait >= self.patience:
            self.stopped_epoch = epoch
            return True
        return False

    def restore(self, model):
        if self.best_state is not None:
            model.load_state_dict(self.best_state)
