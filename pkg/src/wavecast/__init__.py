"""Wavelet-decomposed bidirectional LSTM forecasting toolkit.

Pipeline: ingest aligned price/case series, check stationarity, decompose with
the five-level stationary wavelet transform, train bidirectional LSTMs on raw
or coefficient features, and emit multi-day forecasts with MAE/RMSE reports.
"""

__version__ = "0.1.0"
