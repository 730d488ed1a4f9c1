"""MSE metrics and the model comparison report."""

import csv
import io
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .numerics import mse_loss

# One definition of MSE for training and evaluation.
mse_metric = mse_loss

REPORT_DECIMALS = 4


@dataclass(frozen=True)
class Metrics:
    model_name: str
    mse: float
    n_examples: int


def evaluate_model(predict_fn: Callable, split: Sequence, name: str) -> Metrics:
    """Apply ``predict_fn`` to every example of ``split`` and score it against ``example.target``."""
    if not split:
        raise ValueError("cannot evaluate on an empty split")
    preds = np.array([predict_fn(ex) for ex in split], dtype=np.float64)
    targets = np.array([ex.target for ex in split], dtype=np.float64)
    return Metrics(name, mse_metric(preds, targets), len(split))


def metrics_from_predictions(name: str, predictions, targets) -> Metrics:
    return Metrics(name, mse_metric(predictions, targets), len(targets))


@dataclass(frozen=True)
class Report:
    rows: tuple

    def text(self) -> str:
        header = ("model", "MSE", "n")
        cells = [(m.model_name, _fmt(m.mse), str(m.n_examples)) for m in self.rows]
        w0 = max(len(header[0]), *(len(c[0]) for c in cells))
        w1 = max(len(header[1]), *(len(c[1]) for c in cells))
        w2 = max(len(header[2]), *(len(c[2]) for c in cells))
        lines = [f"{header[0]:<{w0}}  {header[1]:>{w1}}  {header[2]:>{w2}}",
                 f"{'-' * w0}  {'-' * w1}  {'-' * w2}"]
        lines += [f"{a:<{w0}}  {b:>{w1}}  {c:>{w2}}" for a, b, c in cells]
        return "\n".join(lines) + "\n"

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["model", "mse", "n"])
        for m in self.rows:
            w.writerow([m.model_name, _fmt(m.mse), m.n_examples])
        return buf.getvalue()


def _fmt(x: float) -> str:
    return f"{x:.{REPORT_DECIMALS}f}"


def compare_models(metrics: Sequence[Metrics]) -> Report:
    if not metrics:
        raise ValueError("nothing to compare")
    return Report(tuple(metrics))
