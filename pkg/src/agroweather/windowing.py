"""Sliding (input, label) windows over a feature matrix, and mini-batching."""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import TooShort


@dataclass(frozen=True)
class WindowSpec:
    """``input_width`` steps in; labels are the last ``label_width`` steps of
    the ``input_width + shift`` long total window."""

    input_width: int = 365
    label_width: int = 365
    shift: int = 1

    def __post_init__(self):
        if min(self.input_width, self.label_width, self.shift) < 1:
            raise ValueError("window widths and shift must be >= 1")
        if self.label_width > self.total_width:
            raise ValueError("label_width cannot exceed input_width + shift")

    @property
    def total_width(self):
        return self.input_width + self.shift

    @property
    def label_start(self):
        return self.total_width - self.label_width

    def count(self, n):
        return max(0, n - self.total_width + 1)


class SampleWindow(NamedTuple):
    inputs: np.ndarray
    labels: np.ndarray


class WindowSet(NamedTuple):
    """Stacked windows: ``inputs`` (N, input_width, F), ``labels`` (N, label_width, targets)."""

    inputs: np.ndarray
    labels: np.ndarray

    def __len__(self):
        return self.inputs.shape[0]

    def __getitem__(self, i):
        if isinstance(i, (int, np.integer)):
            return SampleWindow(self.inputs[i], self.labels[i])
        return WindowSet(self.inputs[i], self.labels[i])

    def __iter__(self):
        for i in range(len(self)):
            yield SampleWindow(self.inputs[i], self.labels[i])


def make_windows(values, spec=WindowSpec(), target_columns=None):
    """Every stride-1 window of ``values`` (steps x features), in start order.

    ``target_columns`` picks the label columns (default: all). The arrays are
    read-only views into ``values``; copy them before modifying.
    """
    values = np.asarray(getattr(values, "values", values), dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    n = values.shape[0]
    if n < spec.total_width:
        raise TooShort(f"series of {n} steps is shorter than one window ({spec.total_width})")
    # (N, F, total) -> (N, total, F)
    full = sliding_window_view(values, spec.total_width, axis=0).transpose(0, 2, 1)
    inputs = full[:, :spec.input_width]
    labels = full[:, spec.label_start:]
    if target_columns is not None:
        labels = labels[:, :, list(target_columns)]
    return WindowSet(inputs, labels)


def batches(windows, size=64, shuffle=False, seed=None):
    """Split windows into consecutive batches of ``size`` (the last may be short).

    With ``shuffle`` the window order is permuted once by a seeded generator.
    """
    if size < 1:
        raise ValueError("batch size must be >= 1")
    n = len(windows)
    order = np.arange(n)
    if shuffle:
        order = np.random.default_rng(seed).permutation(n)
    out = []
    for lo in range(0, n, size):
        idx = order[lo:lo + size]
        if isinstance(windows, WindowSet):
            if shuffle:
                out.append(WindowSet(windows.inputs[idx], windows.labels[idx]))
            else:
                out.append(windows[lo:lo + size])
        else:
            out.append([windows[i] for i in idx])
    return out
