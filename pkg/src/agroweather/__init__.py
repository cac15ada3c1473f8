"""Weather forecasting and crop advisory toolkit built on stacked Bi-LSTM models."""

__version__ = "0.1.0"
