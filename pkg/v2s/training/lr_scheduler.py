class LambdaWarmUpScheduler:
    """
    Linear warm-up of the learning-rate multiplier from ``lr_start`` to 1 over
    ``warm_up_steps`` optimizer steps, constant afterwards.

    note: use as a multiplier of the configured learning rate
    """

    def __init__(self, warm_up_steps: int, lr_start: float = 0.01):
        self.lr_warm_up_steps = warm_up_steps
        self.lr_start = lr_start

    def schedule(self, n: int) -> float:
        if n < self.lr_warm_up_steps:
            return (1.0 - self.lr_start) / self.lr_warm_up_steps * n + self.lr_start
        return 1.0

    def __call__(self, n: int) -> float:
        return self.schedule(n)


def set_lr(optimizer, base_lr: float, scheduler: LambdaWarmUpScheduler, n: int) -> float:
    lr = base_lr * scheduler(n)
    for group in optimizer.param_groups:
        group["lr"] = lr
    return lr
