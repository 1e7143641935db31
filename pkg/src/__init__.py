# Wavelet canonical coherence for nonstationary multivariate time series
