"""Joint-loss weight schedule for intermediate supervision.

The final block's weight starts at 0.0625 and doubles every period
(10 epochs), capped at 1.0; all other blocks share the remainder equally,
so the weights always sum to 1.
"""

ETA_FINAL_INIT = 0.0625
ETA_PERIOD_EPOCHS = 10


def joint_loss_weights(epoch: int, num_blocks: int,
                       eta_init: float = ETA_FINAL_INIT,
                       period: int = ETA_PERIOD_EPOCHS) -> list[float]:
    """Per-block loss weights at a given epoch; the last entry is the
    final (real network output) weight."""
    if num_blocks < 1:
        raise ValueError("need at least one block")
    if epoch < 0:
        raise ValueError("epoch must be >= 0")
    eta_final = min(eta_init * 2 ** (epoch // period), 1.0)
    if num_blocks == 1:
        return [1.0]
    rest = (1.0 - eta_final) / (num_blocks - 1)
    return [rest] * (num_blocks - 1) + [eta_final]
